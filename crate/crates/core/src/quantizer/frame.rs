use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::ProbabilityFamily;
use crate::numeric::{CompensatedSum, ComplexSum};

/// Default bound on the normalization mass a coherent state may lose to
/// the finite window.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Relative tolerance for `tau (alpha_n - alpha_m) / 2 pi` to be an integer.
const SELECTION_TOL: f64 = 1e-12;

/// The sequence `n -> alpha_n` of angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    /// `alpha_n = 2 pi n / tau`.
    Linear,
    /// `alpha_n = 2 pi n^2 / tau`.
    Quadratic,
    /// Explicit values for the window levels, lowest level first.
    Custom(Vec<f64>),
}

/// The data that turns a probability family into coherent states: the
/// frequencies `alpha_n`, the angle period `tau`, and the finite level
/// window all vectors and operators live on.
#[derive(Debug, Clone, PartialEq)]
pub struct CsFrame {
    pub family: ProbabilityFamily,
    pub alpha: AlphaRule,
    pub tau: f64,
    /// Planck's constant `h`, converting `jt` to `J`.
    pub planck: f64,
    pub tail_tol: f64,
    n_min: i64,
    alphas: Vec<f64>,
    /// `kappa_n` with `alpha_n - alpha_m = (2 pi / tau) (kappa_n - kappa_m)`.
    kappa: Vec<i64>,
}

impl CsFrame {
    pub fn new(family: ProbabilityFamily, alpha: AlphaRule, tau: f64, window: RangeInclusive<i64>) -> Result<Self> {
        let (n_min, n_max) = (*window.start(), *window.end());
        if n_max < n_min {
            return Err(Error::InvalidArgument(format!("empty window {n_min}..={n_max}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("period {tau} must be positive")));
        }
        if !family.contains_level(n_min) || !family.contains_level(n_max) {
            return Err(Error::InvalidArgument(format!(
                "window {n_min}..={n_max} leaves the family's index set"
            )));
        }
        let len = (n_max - n_min + 1) as usize;
        let unit = 2.0 * PI / tau;
        let (alphas, kappa): (Vec<f64>, Vec<i64>) = match &alpha {
            AlphaRule::Linear => window.clone().map(|n| (unit * n as f64, n)).unzip(),
            AlphaRule::Quadratic => window.clone().map(|n| (unit * (n * n) as f64, n * n)).unzip(),
            AlphaRule::Custom(values) => {
                if values.len() != len {
                    return Err(Error::InvalidArgument(format!(
                        "{} custom alpha values for a window of {len} levels",
                        values.len()
                    )));
                }
                if values.iter().any(|a| !a.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite alpha value".into()));
                }
                let mut kappa = Vec::with_capacity(len);
                for (i, a) in values.iter().enumerate() {
                    let k = (a - values[0]) / unit;
                    if (k - k.round()).abs() > SELECTION_TOL * k.abs().max(1.0) {
                        return Err(Error::SelectionRuleViolation {
                            n: n_min + i as i64,
                            m: n_min,
                            k,
                        });
                    }
                    kappa.push(k.round() as i64);
                }
                (values.clone(), kappa)
            }
        };
        Ok(Self {
            family,
            alpha,
            tau,
            planck: 2.0 * PI,
            tail_tol: DEFAULT_TAIL_TOL,
            n_min,
            alphas,
            kappa,
        })
    }

    pub fn with_planck(mut self, planck: f64) -> Self {
        self.planck = planck;
        self
    }

    pub fn with_tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.alphas.len() as i64 - 1
    }

    pub fn window(&self) -> RangeInclusive<i64> {
        self.n_min..=self.n_max()
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn alpha_of(&self, n: i64) -> f64 {
        self.alphas[(n - self.n_min) as usize]
    }

    /// The integer `k(n, m)` with `alpha_n - alpha_m = (2 pi / tau) k`.
    pub fn selection_index(&self, n: i64, m: i64) -> i64 {
        self.kappa[(n - self.n_min) as usize] - self.kappa[(m - self.n_min) as usize]
    }

    fn check_support(&self, jt: f64) -> Result<()> {
        let ok = jt.is_finite() && (self.family.motion() == crate::classical::MotionKind::Rotation || jt >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                action: self.planck * jt,
            })
        }
    }

    /// Coefficients `sqrt(p_n(J) / N(J)) exp(-i alpha_n gamma)` over the
    /// window, without checking how much mass the window misses.
    pub fn projected_coeffs(&self, jt: f64, gamma: f64) -> DVector<Complex64> {
        let norm = self.family.normalization(jt);
        DVector::from_iterator(
            self.dim(),
            self.window().zip(&self.alphas).map(|(n, a)| {
                let amp = (self.family.eval(n, jt) / norm).sqrt();
                Complex64::from_polar(amp, -a * gamma)
            }),
        )
    }

    /// Mass of the normalized state outside the window.
    pub fn missing_mass(&self, jt: f64) -> f64 {
        let norm = self.family.normalization(jt);
        let inside = self
            .window()
            .map(|n| self.family.eval(n, jt))
            .collect::<CompensatedSum>()
            .value();
        (1.0 - inside / norm).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub offset: i64,
    pub coeffs: DVector<Complex64>,
    pub jt: f64,
    pub gamma: f64,
}

impl CoherentState {
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<CompensatedSum>()
            .value()
            .sqrt()
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs[(n - self.offset) as usize]
    }

    /// `<self | other>`.
    pub fn inner(&self, other: &CoherentState) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (a, b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            acc.add(a.conj() * b);
        }
        acc.value()
    }
}

/// `|J, gamma> = N(J)^{-1/2} sum_n sqrt(p_n(J)) exp(-i alpha_n gamma) |e_n>`
/// at `jt = J / h`.
pub fn coherent_state(frame: &CsFrame, jt: f64, gamma: f64) -> Result<CoherentState> {
    frame.check_support(jt)?;
    let norm = frame.family.normalization(jt);
    let missing = if norm > 0.0 { frame.missing_mass(jt) } else { 1.0 };
    if !(missing <= frame.tail_tol) {
        return Err(Error::EmptyWindow {
            jt,
            n_min: frame.n_min(),
            n_max: frame.n_max(),
            missing,
        });
    }
    Ok(CoherentState {
        offset: frame.n_min(),
        coeffs: frame.projected_coeffs(jt, gamma),
        jt,
        gamma,
    })
}

/// `Psi(J, gamma) = sqrt(N(J)) <J, gamma | J0, gamma0>`
/// `= N(J0)^{-1/2} sum_n sqrt(p_n(J) p_n(J0)) exp(i alpha_n (gamma - gamma0))`.
pub fn overlap(frame: &CsFrame, jt0: f64, gamma0: f64, jt: f64, gamma: f64) -> Complex64 {
    let norm0 = frame.family.normalization(jt0);
    let mut acc = ComplexSum::new();
    for (n, a) in frame.window().zip(&frame.alphas) {
        let amp = (frame.family.eval(n, jt) * frame.family.eval(n, jt0)).sqrt();
        acc.add(Complex64::from_polar(amp, a * (gamma - gamma0)));
    }
    acc.value() / norm0.sqrt()
}
