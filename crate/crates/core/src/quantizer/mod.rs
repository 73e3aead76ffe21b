//! Coherent states and the quantization map `f -> A_f`.
//!
//! The action `jt` is always the dimensionless `J / h`. Classical
//! functions of the action passed to [`quantize_action`] receive the
//! physical `J = h jt`, using the frame's `planck`.

mod frame;
mod operator;
mod symbol;

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::classical::ClassicalModel;
use crate::error::{Error, Result};
use crate::family::{energy_average, ProbabilityFamily};
use crate::grid::PhaseGrid;
use crate::numeric::ComplexSum;

pub use frame::{coherent_state, overlap, AlphaRule, CoherentState, CsFrame, DEFAULT_TAIL_TOL};
pub use operator::{commutator, unitarity_defect, OperatorMatrix};
pub use symbol::{parse_samples, FourierSymbol, SAMPLE_COUNT};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `A_f` for a function of the action: `[A]_{nm} = int f sqrt(p_n p_m) w`
/// when `alpha_n = alpha_m`, and 0 otherwise.
pub fn quantize_action(frame: &CsFrame, f: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
    let h = frame.planck;
    let g = |x: f64| f(h * x);
    let dim = frame.dim();
    let mut m = DMatrix::from_element(dim, dim, zero());
    for (i, n) in frame.window().enumerate() {
        m[(i, i)] = real(frame.family.expectation(n, g)?);
        for (j, k) in frame.window().enumerate().skip(i + 1) {
            if frame.selection_index(n, k) == 0 {
                let v = frame.family.pair_integral(n, k, g)?;
                m[(i, j)] = real(v);
                m[(j, i)] = real(v);
            }
        }
    }
    Ok(OperatorMatrix::new(frame.n_min(), m))
}

/// `A_{E(J)}` for a classical model; diagonal entries split the integration
/// at the non-smooth points of `E(J)`.
pub fn quantize_energy(frame: &CsFrame, model: &ClassicalModel) -> Result<OperatorMatrix> {
    let dim = frame.dim();
    let mut m = DMatrix::from_element(dim, dim, zero());
    let failure = RefCell::new(None);
    let h = model.planck();
    let energy = |x: f64| match model.energy_of_action(h * x) {
        Ok(e) => e,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            f64::NAN
        }
    };
    for (i, n) in frame.window().enumerate() {
        m[(i, i)] = real(energy_average(&frame.family, model, n)?);
        for (j, k) in frame.window().enumerate().skip(i + 1) {
            if frame.selection_index(n, k) == 0 {
                let v = frame.family.pair_integral(n, k, energy)?;
                if let Some(err) = failure.borrow_mut().take() {
                    return Err(err);
                }
                m[(i, j)] = real(v);
                m[(j, i)] = real(v);
            }
        }
    }
    Ok(OperatorMatrix::new(frame.n_min(), m))
}

/// Correlations `varpi_{nm} = int sqrt(p_n p_m) w d jt` over the window.
pub fn correlation_matrix(frame: &CsFrame) -> Result<DMatrix<f64>> {
    let dim = frame.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for (i, n) in frame.window().enumerate() {
        m[(i, i)] = frame.family.correlation(n, n)?;
        for (j, k) in frame.window().enumerate().skip(i + 1) {
            let v = frame.family.correlation(n, k)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn check_period(frame: &CsFrame, symbol: &FourierSymbol) -> Result<()> {
    let (a, b) = (frame.tau, symbol.tau());
    if (a - b).abs() > 1e-14 * a.abs().max(b.abs()) {
        return Err(Error::InvalidArgument(format!(
            "symbol period {b} differs from frame period {a}"
        )));
    }
    Ok(())
}

/// `A_f` for a `tau`-periodic function of the angle:
/// `[A]_{nm} = varpi_{nm} c_{k(n,m)}`, with the diagonal exactly `c_0`.
pub fn quantize_angle(frame: &CsFrame, symbol: &FourierSymbol) -> Result<OperatorMatrix> {
    check_period(frame, symbol)?;
    let dim = frame.dim();
    let mut m = DMatrix::from_element(dim, dim, zero());
    for (i, n) in frame.window().enumerate() {
        for (j, k) in frame.window().enumerate() {
            if i == j {
                m[(i, j)] = symbol.coeff(0);
                continue;
            }
            let c = symbol.coeff(frame.selection_index(n, k));
            if c != zero() {
                m[(i, j)] = c * frame.family.correlation(n, k)?;
            }
        }
    }
    Ok(OperatorMatrix::new(frame.n_min(), m))
}

/// As [`quantize_angle`], with precomputed (or perturbed) correlations.
pub fn quantize_angle_with(frame: &CsFrame, symbol: &FourierSymbol, varpi: &DMatrix<f64>) -> Result<OperatorMatrix> {
    check_period(frame, symbol)?;
    let dim = frame.dim();
    if varpi.nrows() != dim || varpi.ncols() != dim {
        return Err(Error::InvalidArgument(
            "correlation matrix does not match the window".into(),
        ));
    }
    let mut m = DMatrix::from_element(dim, dim, zero());
    for (i, n) in frame.window().enumerate() {
        for (j, k) in frame.window().enumerate() {
            m[(i, j)] = if i == j {
                symbol.coeff(0)
            } else {
                symbol.coeff(frame.selection_index(n, k)) * varpi[(i, j)]
            };
        }
    }
    Ok(OperatorMatrix::new(frame.n_min(), m))
}

/// `<J, gamma| A |J, gamma>` with the window-projected state.
pub fn lower_symbol(frame: &CsFrame, a: &OperatorMatrix, jt: f64, gamma: f64) -> Complex64 {
    let c = frame.projected_coeffs(jt, gamma);
    let shift = (a.offset - frame.n_min()) as usize;
    let mut acc = ComplexSum::new();
    for i in 0..a.dim() {
        let ci = c[i + shift].conj();
        for j in 0..a.dim() {
            acc.add(ci * a.entries[(i, j)] * c[j + shift]);
        }
    }
    acc.value()
}

/// Terms retained by [`angle_lower_symbol_profile`]: `exp(-eps k^2 / 2)`
/// drops below `1e-17`.
fn fast_path_cutoff(eps: f64) -> i64 {
    (2.0 * (1e17f64).ln() / eps).sqrt().ceil() as i64
}

/// Lower symbol of `A_f` for the Gaussian family with `alpha_n = 2 pi n / tau`
/// on the full index set `Z` (no window):
/// `sum_k c_k exp(-eps k^2 / 2) N(jt + k/2) / N(jt) exp(2 pi i k gamma / tau)`.
pub fn angle_lower_symbol_profile(
    frame: &CsFrame,
    symbol: &FourierSymbol,
    jt: f64,
    gammas: &[f64],
) -> Result<Vec<Complex64>> {
    check_period(frame, symbol)?;
    let g = match (&frame.family, &frame.alpha) {
        (ProbabilityFamily::Gaussian(g), AlphaRule::Linear) => *g,
        _ => {
            return Err(Error::InvalidArgument(
                "closed-form lower symbol needs the Gaussian family with linear alpha".into(),
            ))
        }
    };
    let eps = g.epsilon;
    let norm = |x: f64| {
        if eps < 1.0 {
            g.normalization_poisson(x)
        } else {
            frame.family.normalization(x)
        }
    };
    let n0 = norm(jt);
    let kmax = fast_path_cutoff(eps);
    let weights: Vec<(i64, Complex64)> = (-kmax..=kmax)
        .filter_map(|k| {
            let c = symbol.coeff(k);
            if c == zero() {
                return None;
            }
            let damp = (-0.5 * eps * (k * k) as f64).exp() * norm(jt + 0.5 * k as f64) / n0;
            Some((k, c * damp))
        })
        .collect();
    let tau = frame.tau;
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let mut acc = ComplexSum::new();
            for (k, w) in &weights {
                acc.add(w * Complex64::from_polar(1.0, 2.0 * PI * *k as f64 * gamma / tau));
            }
            acc.value()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeError {
    pub pointwise: Vec<f64>,
    pub sup: f64,
}

/// `|(f_check - f) / (f + shift)|` at the given `(jt, gamma)` points, where
/// `f_check` is the lower symbol of `a`.
pub fn relative_error(
    frame: &CsFrame,
    f: impl Fn(f64, f64) -> f64,
    a: &OperatorMatrix,
    shift: f64,
    points: &[(f64, f64)],
) -> Result<RelativeError> {
    let mut pointwise = Vec::with_capacity(points.len());
    for (index, &(jt, gamma)) in points.iter().enumerate() {
        let value = f(jt, gamma);
        let denom = value + shift;
        if !(denom.abs() >= 1e-12) {
            return Err(Error::DivisionGuard { index, value: denom });
        }
        let check = lower_symbol(frame, a, jt, gamma).re;
        pointwise.push(((check - value) / denom).abs());
    }
    let sup = pointwise.iter().copied().fold(0.0, f64::max);
    Ok(RelativeError { pointwise, sup })
}

/// `max |int N(J) |J,gamma><J,gamma| w d jt d gamma / tau - I|` on `grid`.
pub fn resolution_check(frame: &CsFrame, grid: &PhaseGrid) -> f64 {
    let dim = frame.dim();
    let mut acc = DMatrix::from_element(dim, dim, zero());
    let alphas: Vec<f64> = frame.window().map(|n| frame.alpha_of(n)).collect();
    for (&jt, &wj) in grid.jt.iter().zip(&grid.jt_weights) {
        let w = wj * frame.family.weight(jt);
        if w == 0.0 {
            continue;
        }
        let amp: Vec<f64> = frame.window().map(|n| frame.family.eval(n, jt).sqrt()).collect();
        for (&gamma, &wg) in grid.gamma.iter().zip(&grid.gamma_weights) {
            let v: Vec<Complex64> = amp
                .iter()
                .zip(&alphas)
                .map(|(a, al)| Complex64::from_polar(*a, -al * gamma))
                .collect();
            let s = w * wg;
            for i in 0..dim {
                let vi = v[i] * s;
                for j in 0..dim {
                    acc[(i, j)] += vi * v[j].conj();
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc[(i, j)] - target).norm());
        }
    }
    worst
}

/// `rho(J, gamma) = N(J) |<J, gamma | J0, gamma0>|^2` on `grid` (action-major).
pub fn husimi(frame: &CsFrame, jt0: f64, gamma0: f64, grid: &PhaseGrid) -> Vec<f64> {
    grid.points()
        .map(|(jt, gamma)| overlap(frame, jt0, gamma0, jt, gamma).norm_sqr())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{FreeRotor, HarmonicOscillator};
    use crate::family::{gamma_family, gaussian_family};

    const TAU: f64 = 2.0 * PI;

    fn gaussian_frame(eps: f64, alpha: AlphaRule, n: i64) -> CsFrame {
        CsFrame::new(gaussian_family(eps, None).unwrap(), alpha, TAU, -n..=n).unwrap()
    }

    #[test]
    fn action_operator_is_lattice() {
        let frame = gaussian_frame(1.0, AlphaRule::Linear, 6);
        let a = quantize_action(&frame, |j| j).unwrap();
        assert!(a.is_diagonal());
        for n in -6..=6 {
            assert!((a.get(n, n).re - TAU * n as f64).abs() < 1e-12);
        }
        let g = CsFrame::new(gamma_family(), AlphaRule::Linear, TAU, 0..=8).unwrap();
        let a = quantize_action(&g, |j| j).unwrap();
        for n in 0..=8 {
            assert!((a.get(n, n).re - TAU * (n + 1) as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn energy_operators_match_closed_forms() {
        let osc = ClassicalModel::Oscillator(HarmonicOscillator::default());
        let frame = CsFrame::new(gamma_family(), AlphaRule::Linear, TAU, 0..=6).unwrap();
        let h = quantize_energy(&frame, &osc).unwrap();
        for (i, e) in h.eigenvalues().iter().enumerate() {
            assert!((e - (i + 1) as f64).abs() < 1e-11);
        }
        let rotor = ClassicalModel::Rotor(FreeRotor::default());
        let frame = gaussian_frame(2.0, AlphaRule::Quadratic, 3);
        let h = quantize_energy(&frame, &rotor).unwrap();
        // Quadratic alpha couples n and -n; the rotor energy is even so the
        // coupling is the pair integral of an even function.
        assert!(h.get(2, -2).norm() > 0.0);
        assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn harmonic_symbol_has_closed_form_correlations() {
        let eps = 1.3;
        let frame = gaussian_frame(eps, AlphaRule::Linear, 5);
        let a = quantize_angle(&frame, &FourierSymbol::harmonic(TAU, 1)).unwrap();
        for n in -5..=5 {
            for m in -5..=5 {
                let expected = if n - m == 1 { (-eps / 4.0).exp() } else { 0.0 };
                let v = a.get(n, m);
                if n == m {
                    assert_eq!(v, zero());
                } else {
                    assert!((v.re - expected).abs() < 1e-12 && v.im == 0.0, "{n} {m} {v}");
                }
            }
        }
    }

    #[test]
    fn quadratic_alpha_gives_sparse_harmonic() {
        let frame = gaussian_frame(1.0, AlphaRule::Quadratic, 4);
        let a = quantize_angle(&frame, &FourierSymbol::harmonic(TAU, 1)).unwrap();
        let nonzero: Vec<(i64, i64)> = frame
            .window()
            .flat_map(|n| frame.window().map(move |m| (n, m)))
            .filter(|&(n, m)| a.get(n, m) != zero())
            .collect();
        assert_eq!(nonzero, vec![(-1, 0), (1, 0)]);
    }

    #[test]
    fn angle_operator_diagonal_and_spectrum() {
        let frame = gaussian_frame(0.3, AlphaRule::Linear, 10);
        let a = quantize_angle(&frame, &FourierSymbol::sawtooth(TAU)).unwrap();
        assert!(a.diagonal().iter().all(|d| *d == real(PI)));
        assert!(a.hermitian_defect() < 1e-14);
        let ev = a.eigenvalues();
        assert!(ev[0] >= -1e-9 && *ev.last().unwrap() <= TAU + 1e-9);
    }

    #[test]
    fn closed_form_profile_matches_matrix_path() {
        let eps = 2.0;
        let frame = gaussian_frame(eps, AlphaRule::Linear, 24);
        let saw = FourierSymbol::sawtooth(TAU);
        let a = quantize_angle(&frame, &saw).unwrap();
        let gammas = [0.3, 1.7, PI, 5.0];
        let fast = angle_lower_symbol_profile(&frame, &saw, 0.5, &gammas).unwrap();
        for (g, f) in gammas.iter().zip(&fast) {
            let slow = lower_symbol(&frame, &a, 0.5, *g);
            assert!((slow - f).norm() < 1e-10, "{slow} vs {f}");
        }
    }

    #[test]
    fn constant_function_quantizes_to_identity() {
        let frame = gaussian_frame(1.0, AlphaRule::Linear, 5);
        let a = quantize_action(&frame, |_| 1.0).unwrap();
        let id = OperatorMatrix::identity(-5, 11);
        let dev = (&a.entries - &id.entries).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(dev < 1e-12);
        let r = relative_error(&frame, |_, _| 1.0, &a, 0.0, &[(0.0, 0.0), (0.5, 2.0)]).unwrap();
        assert!(r.sup < 1e-12);
        assert!(matches!(
            relative_error(&frame, |_, _| 1.0, &a, -1.0, &[(0.0, 0.0)]),
            Err(Error::DivisionGuard { index: 0, .. })
        ));
    }

    #[test]
    fn resolution_of_unity_on_single_level() {
        let frame = CsFrame::new(gamma_family(), AlphaRule::Linear, TAU, 3..=3).unwrap();
        let grid = PhaseGrid::laguerre(64, 8, TAU).unwrap();
        assert!(resolution_check(&frame, &grid) < 1e-10);
    }
}
