//! Time evolution of coherent states under a diagonal Hamiltonian, the
//! evolved phase-space density, and the free-rotor bound and stability
//! checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalModel, FreeRotor};
use crate::error::{Error, Result};
use crate::family::{energy_average, ProbabilityFamily};
use crate::grid::{mean_action, reduced_angle, PhaseGrid};
use crate::numeric::{CompensatedSum, ComplexSum};
use crate::quantizer::{coherent_state, AlphaRule, CoherentState, CsFrame, OperatorMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub frame: CsFrame,
    /// Diagonal of the Hamiltonian over the frame window.
    pub energies: Vec<f64>,
    pub hbar: f64,
    /// Set for the free rotor; enables the reduced time `hbar t / (2 m l^2)`.
    pub rotor: Option<FreeRotor>,
}

impl EvolutionSpec {
    pub fn new(frame: CsFrame, hamiltonian: &OperatorMatrix, hbar: f64) -> Result<Self> {
        if hamiltonian.offset != frame.n_min() || hamiltonian.dim() != frame.dim() {
            return Err(Error::WindowMismatch {
                left_offset: frame.n_min(),
                left_dim: frame.dim(),
                right_offset: hamiltonian.offset,
                right_dim: hamiltonian.dim(),
            });
        }
        if !hamiltonian.is_diagonal() || hamiltonian.diagonal().iter().any(|e| e.im != 0.0) {
            return Err(Error::InvalidArgument(
                "the Hamiltonian must be real and diagonal".into(),
            ));
        }
        let energies = hamiltonian.diagonal().iter().map(|e| e.re).collect();
        Ok(Self {
            frame,
            energies,
            hbar,
            rotor: None,
        })
    }

    /// Free rotor with `A_H = diag(<E>_n)`, the level averages of `E(J)`.
    ///
    /// With quadratic alpha, `A_{E(J)}` also couples `n` and `-n`
    /// (`alpha_n = alpha_{-n}`); the evolution uses the diagonal only.
    pub fn free_rotor(frame: CsFrame, rotor: FreeRotor) -> Result<Self> {
        let model = ClassicalModel::Rotor(rotor);
        let frame = frame.with_planck(model.planck());
        let energies = frame
            .window()
            .map(|n| energy_average(&frame.family, &model, n))
            .collect::<Result<Vec<_>>>()?;
        let h = OperatorMatrix::from_diagonal(frame.n_min(), &energies);
        let mut spec = Self::new(frame, &h, rotor.hbar)?;
        spec.rotor = Some(rotor);
        Ok(spec)
    }

    pub fn reduced_time(&self, t: f64) -> Result<f64> {
        self.rotor.map(|r| r.reduced_time(t)).ok_or(Error::UnsupportedModel)
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t / self.hbar))
            .collect()
    }
}

/// `c_n(t) = exp(-i E_n t / hbar) c_n(0)`.
pub fn evolve_coeffs(spec: &EvolutionSpec, state: &CoherentState, t: f64) -> CoherentState {
    let shift = (state.offset - spec.frame.n_min()) as usize;
    let phases = spec.phases(t);
    let mut out = state.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= phases[i + shift];
    }
    out
}

/// `rho(J, gamma; t) = N(J) |<J, gamma| exp(-i A_H t / hbar) |J0, gamma0>|^2`
/// on `grid` (action-major).
pub fn phase_density(spec: &EvolutionSpec, jt0: f64, gamma0: f64, grid: &PhaseGrid, t: f64) -> Vec<f64> {
    let frame = &spec.frame;
    let fam = &frame.family;
    let norm0 = fam.normalization(jt0);
    let phases = spec.phases(t);
    let alphas: Vec<f64> = frame.window().map(|n| frame.alpha_of(n)).collect();
    let amp0: Vec<f64> = frame.window().map(|n| fam.eval(n, jt0)).collect();
    let mut out = Vec::with_capacity(grid.len());
    for &jt in &grid.jt {
        let amp: Vec<f64> = frame
            .window()
            .zip(&amp0)
            .map(|(n, p0)| (fam.eval(n, jt) * p0).sqrt())
            .collect();
        for &gamma in &grid.gamma {
            let mut acc = ComplexSum::new();
            for i in 0..amp.len() {
                acc.add(Complex64::from_polar(amp[i], alphas[i] * (gamma - gamma0)) * phases[i]);
            }
            out.push(acc.value().norm_sqr() / norm0);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub t: f64,
    pub j_tilde: f64,
    pub gamma: f64,
    pub rho: f64,
}

/// [`phase_density`] at every time of the grid.
pub fn phase_density_series(spec: &EvolutionSpec, jt0: f64, gamma0: f64, grid: &PhaseGrid) -> Vec<DensitySample> {
    let mut out = Vec::with_capacity(grid.len() * grid.times.len());
    for &t in &grid.times {
        let rho = phase_density(spec, jt0, gamma0, grid, t);
        for ((jt, gamma), r) in grid.points().zip(rho) {
            out.push(DensitySample {
                t,
                j_tilde: jt,
                gamma,
                rho: r,
            });
        }
    }
    out
}

/// Which closed form of the free-rotor density bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// Single theta sum with exponent `eps / (2 (eps^2 + s^2))`.
    Printed,
    /// Squared theta sum with exponent `eps / (4 (eps^2 + s^2))`, obtained
    /// from the triangle inequality after Poisson resummation.
    #[default]
    Coherent,
}

/// `sum_m exp(-coef (2 pi m - shift)^2)`.
fn theta_sum(coef: f64, shift: f64) -> f64 {
    let center = shift / (2.0 * PI);
    let half = (745.0 / coef).sqrt() / (2.0 * PI) + 1.0;
    let lo = (center - half).floor() as i64;
    let hi = (center + half).ceil() as i64;
    (lo..=hi)
        .map(|m| {
            let d = 2.0 * PI * m as f64 - shift;
            (-coef * d * d).exp()
        })
        .collect::<CompensatedSum>()
        .value()
}

fn bound_from(form: BoundForm, eps: f64, norm0: f64, dj: f64, s: f64, shift_printed: f64, shift_coherent: f64) -> f64 {
    let d2 = eps * eps + s * s;
    let prefactor = eps / d2.sqrt() * (-0.5 * eps * dj * dj).exp() / norm0;
    match form {
        BoundForm::Printed => prefactor * theta_sum(eps / (2.0 * d2), shift_printed),
        BoundForm::Coherent => {
            let t = theta_sum(eps / (4.0 * d2), shift_coherent);
            prefactor * t * t
        }
    }
}

/// Bound on `rho` for `alpha_n = 2 pi n / tau` at reduced angle `g_red`,
/// reduced time `t_red`.
pub fn upper_bound_linear(form: BoundForm, eps: f64, norm0: f64, jt: f64, jt0: f64, g_red: f64, t_red: f64) -> f64 {
    let mu = mean_action(jt, jt0);
    bound_from(
        form,
        eps,
        norm0,
        jt - jt0,
        t_red,
        g_red - mu * t_red,
        g_red - 2.0 * mu * t_red,
    )
}

/// Bound on `rho` for `alpha_n = 2 pi n^2 / tau`, with `g_t = g_red - t_red`.
pub fn upper_bound_quadratic(form: BoundForm, eps: f64, norm0: f64, jt: f64, jt0: f64, g_red: f64, t_red: f64) -> f64 {
    let mu = mean_action(jt, jt0);
    let g_t = g_red - t_red;
    bound_from(form, eps, norm0, jt - jt0, g_t, 2.0 * mu * g_t, 2.0 * mu * g_t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub t: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub form: BoundForm,
    pub alpha: &'static str,
    pub max_violation: f64,
    pub argmax: GridPoint,
}

fn gaussian_eps(spec: &EvolutionSpec) -> Result<f64> {
    match &spec.frame.family {
        ProbabilityFamily::Gaussian(g) => Ok(g.epsilon),
        _ => Err(Error::InvalidArgument(
            "the rotor bounds need the Gaussian family".into(),
        )),
    }
}

fn verify_bound(
    spec: &EvolutionSpec,
    jt0: f64,
    gamma0: f64,
    grid: &PhaseGrid,
    form: BoundForm,
    alpha: &'static str,
    bound: fn(BoundForm, f64, f64, f64, f64, f64, f64) -> f64,
) -> Result<BoundReport> {
    let eps = gaussian_eps(spec)?;
    let norm0 = spec.frame.family.normalization(jt0);
    let tau = spec.frame.tau;
    let mut report = BoundReport {
        form,
        alpha,
        max_violation: f64::NEG_INFINITY,
        argmax: GridPoint {
            t: 0.0,
            j: jt0,
            gamma: gamma0,
        },
    };
    for &t in &grid.times {
        let t_red = spec.reduced_time(t)?;
        let rho = phase_density(spec, jt0, gamma0, grid, t);
        for ((jt, gamma), r) in grid.points().zip(rho) {
            let b = bound(form, eps, norm0, jt, jt0, reduced_angle(gamma, gamma0, tau), t_red);
            let v = r - b;
            if v > report.max_violation {
                report.max_violation = v;
                report.argmax = GridPoint { t, j: jt, gamma };
            }
        }
    }
    Ok(report)
}

/// `max (rho - bound)` over the grid and its times for `alpha_n = 2 pi n / tau`.
pub fn verify_upper_bound_linear(
    spec: &EvolutionSpec,
    jt0: f64,
    gamma0: f64,
    grid: &PhaseGrid,
    form: BoundForm,
) -> Result<BoundReport> {
    if spec.frame.alpha != AlphaRule::Linear {
        return Err(Error::InvalidArgument(
            "linear bound needs alpha_n = 2 pi n / tau".into(),
        ));
    }
    verify_bound(spec, jt0, gamma0, grid, form, "linear", upper_bound_linear)
}

/// `max (rho - bound)` for `alpha_n = 2 pi n^2 / tau`.
pub fn verify_upper_bound_quadratic(
    spec: &EvolutionSpec,
    jt0: f64,
    gamma0: f64,
    grid: &PhaseGrid,
    form: BoundForm,
) -> Result<BoundReport> {
    if spec.frame.alpha != AlphaRule::Quadratic {
        return Err(Error::InvalidArgument(
            "quadratic bound needs alpha_n = 2 pi n^2 / tau".into(),
        ));
    }
    verify_bound(spec, jt0, gamma0, grid, form, "quadratic", upper_bound_quadratic)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeReport {
    pub max_off_lattice: f64,
    pub argmax: GridPoint,
    pub max_on_lattice: f64,
    pub on_lattice_points: usize,
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// Largest density away from the semiclassical lattice for an integer
/// `jt0 = M`: `jt = M` and `g_red / 2 pi - M t_red` integer (linear alpha),
/// or `M (g_red - t_red) / 2 pi` integer (quadratic alpha).
pub fn lattice_check(spec: &EvolutionSpec, jt0: f64, gamma0: f64, grid: &PhaseGrid) -> Result<LatticeReport> {
    let tau = spec.frame.tau;
    let quadratic = match spec.frame.alpha {
        AlphaRule::Linear => false,
        AlphaRule::Quadratic => true,
        AlphaRule::Custom(_) => {
            return Err(Error::InvalidArgument(
                "lattice check needs linear or quadratic alpha".into(),
            ))
        }
    };
    let mut report = LatticeReport {
        max_off_lattice: 0.0,
        argmax: GridPoint {
            t: 0.0,
            j: jt0,
            gamma: gamma0,
        },
        max_on_lattice: 0.0,
        on_lattice_points: 0,
    };
    for &t in &grid.times {
        let t_red = spec.reduced_time(t)?;
        let rho = phase_density(spec, jt0, gamma0, grid, t);
        for ((jt, gamma), r) in grid.points().zip(rho) {
            let g = reduced_angle(gamma, gamma0, tau);
            let on = (jt - jt0).abs() < 1e-9
                && if quadratic {
                    near_integer(jt0 * (g - t_red) / (2.0 * PI))
                } else {
                    near_integer(g / (2.0 * PI) - jt0 * t_red)
                };
            if on {
                report.on_lattice_points += 1;
                report.max_on_lattice = report.max_on_lattice.max(r);
            } else if r > report.max_off_lattice {
                report.max_off_lattice = r;
                report.argmax = GridPoint { t, j: jt, gamma };
            }
        }
    }
    Ok(report)
}

/// `|<J, gamma + tau t_red / 2 pi| U(t) |J, gamma>|`; equals 1 exactly when
/// the evolution maps coherent states to coherent states.
pub fn stability_overlap(spec: &EvolutionSpec, jt: f64, gamma: f64, t: f64) -> Result<f64> {
    let t_red = spec.reduced_time(t)?;
    let state = coherent_state(&spec.frame, jt, gamma)?;
    let evolved = evolve_coeffs(spec, &state, t);
    let shifted = coherent_state(&spec.frame, jt, gamma + spec.frame.tau * t_red / (2.0 * PI))?;
    Ok(shifted.inner(&evolved).norm())
}

/// Time after which every `exp(-i E_n t / hbar)` returns to a common phase:
/// `t_red = 2 pi`, i.e. `4 pi m l^2 / hbar`.
pub fn revival_time(rotor: &FreeRotor) -> f64 {
    rotor.time_from_reduced(2.0 * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDensity {
    pub psi: Vec<Complex64>,
    pub rho: Vec<f64>,
}

fn plane_wave(n: i64, q: f64, length: f64) -> Complex64 {
    Complex64::from_polar(1.0 / length.sqrt(), 2.0 * PI * n as f64 * q / length)
}

/// `psi(q) = sum_n c_n e^{2 pi i n q / L} / sqrt(L)` on the rotor circle.
pub fn config_representation(model: &ClassicalModel, state: &CoherentState, q: &[f64]) -> Result<ConfigDensity> {
    let rotor = match model {
        ClassicalModel::Rotor(r) => r,
        _ => return Err(Error::UnsupportedModel),
    };
    let length = rotor.circumference();
    let psi: Vec<Complex64> = q
        .iter()
        .map(|&x| {
            let mut acc = ComplexSum::new();
            for (i, c) in state.coeffs.iter().enumerate() {
                acc.add(c * plane_wave(state.offset + i as i64, x, length));
            }
            acc.value()
        })
        .collect();
    let rho = psi.iter().map(|p| p.norm_sqr()).collect();
    Ok(ConfigDensity { psi, rho })
}

/// Time-evolved configuration wavefunction summed directly from
/// `N(J0)^{-1/2} sum_n sqrt(p_n(J0)) e^{-i(alpha_n gamma0 + E_n t / hbar)} psi_n(q)`.
pub fn evolved_wavefunction(spec: &EvolutionSpec, jt0: f64, gamma0: f64, t: f64, q: &[f64]) -> Result<Vec<Complex64>> {
    let rotor = spec.rotor.ok_or(Error::UnsupportedModel)?;
    let length = rotor.circumference();
    let frame = &spec.frame;
    let norm0 = frame.family.normalization(jt0).sqrt();
    Ok(q.iter()
        .map(|&x| {
            let mut acc = ComplexSum::new();
            for (i, n) in frame.window().enumerate() {
                let amp = frame.family.eval(n, jt0).sqrt() / norm0;
                let phase = -(frame.alpha_of(n) * gamma0 + spec.energies[i] * t / spec.hbar);
                acc.add(Complex64::from_polar(amp, phase) * plane_wave(n, x, length));
            }
            acc.value()
        })
        .collect())
}
