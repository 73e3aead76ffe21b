//! Probability families `n -> p_n(J)` over the action variable.
//!
//! All densities are functions of the dimensionless action `jt = J / h` and
//! are normalized against `d jt`. A family knows how to integrate against
//! its own envelope: Gaussian kinds use Gauss-Hermite rules centred on the
//! (product) Gaussian, the gamma family uses Gauss-Laguerre rules, and the
//! generalized gamma family integrates on the discrete grid carrying its
//! moment-problem weight `w_y`.

mod document;
mod fit;
mod moment;

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::classical::{ClassicalModel, MotionKind};
use crate::error::{Error, Result};
use crate::numeric::quadrature::{gauss_kronrod_split, hermite_escalating, laguerre_escalating, LogGrid, RuleKind};
use crate::numeric::{ln_factorial, CompensatedSum};

pub use document::{FamilyDocument, WeightGrid};
pub use fit::{classical_centers, fit_sigma, ShiftAnchor, SigmaFit};
pub use moment::{nnls, solve_weight, WeightSolution, MOMENT_RESIDUAL_LIMIT};

/// Tail tolerance certifying the Gaussian level windows.
pub const GAUSSIAN_TAIL_TOL: f64 = 1e-14;
/// Relative cutoff for the half-line families: levels with
/// `p_n(J) < 1e-16 N(J)` are dropped.
pub const HALF_LINE_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Gaussian,
    PerLevelGaussian,
    Gamma,
    GeneralizedGamma,
}

/// `p_n(J) = sqrt(eps/pi) exp(-eps (jt - n)^2)`, `n` in Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFamily {
    pub epsilon: f64,
}

impl GaussianFamily {
    pub fn sigma(&self) -> f64 {
        (0.5 / self.epsilon).sqrt()
    }

    /// Half-width of the certified level window around `jt`.
    pub fn window_half_width(&self) -> i64 {
        ((1.0 / GAUSSIAN_TAIL_TOL).ln() / self.epsilon).sqrt().ceil() as i64 + 2
    }

    /// `N(J)` by Poisson resummation:
    /// `sum_n exp(2 pi i n jt) exp(-pi^2 n^2 / eps)`.
    pub fn normalization_poisson(&self, jt: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for n in 1.. {
            let damp = (-PI * PI * (n * n) as f64 / self.epsilon).exp();
            if damp < 1e-18 {
                break;
            }
            acc.add(2.0 * (2.0 * PI * n as f64 * jt).cos() * damp);
        }
        acc.value()
    }
}

/// Normal laws with their own centres and widths (in `jt` units) for the
/// finite set of levels `offset .. offset + centers.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLevelGaussian {
    pub offset: i64,
    pub centers: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl PerLevelGaussian {
    pub fn new(offset: i64, centers: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if centers.len() != sigmas.len() || centers.is_empty() {
            return Err(Error::InvalidFamily(format!(
                "{} centers for {} sigmas",
                centers.len(),
                sigmas.len()
            )));
        }
        if let Some(&s) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::NonpositiveWidth(s));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFamily("non-finite center".into()));
        }
        Ok(Self {
            offset,
            centers,
            sigmas,
        })
    }

    fn slot(&self, n: i64) -> Option<usize> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.centers.len()).then_some(i as usize)
    }

    pub fn levels(&self) -> RangeInclusive<i64> {
        self.offset..=self.offset + self.centers.len() as i64 - 1
    }
}

/// Strictly increasing `0 = y_0 < y_1 < ...` with `y_n! = y_1 ... y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct YSequence {
    values: Vec<f64>,
    ln_factorials: Vec<f64>,
}

impl YSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSequence("need at least y_0 and y_1".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidSequence(format!("y_0 must be 0, got {}", values[0])));
        }
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidSequence(format!(
                    "not strictly increasing at index {}: {} -> {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        let mut ln_factorials = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        ln_factorials.push(0.0);
        for y in &values[1..] {
            acc += y.ln();
            ln_factorials.push(acc);
        }
        Ok(Self { values, ln_factorials })
    }

    /// `y_n = n`, the Poisson case.
    pub fn identity(len: usize) -> Self {
        Self::new((0..len).map(|n| n as f64).collect()).expect("identity sequence is valid")
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.ln_factorials[n]
    }

    /// `y_n!` by the recurrence `y_n! = y_n y_{n-1}!`.
    pub fn factorials(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 1.0;
        out.push(acc);
        for y in &self.values[1..] {
            acc *= y;
            out.push(acc);
        }
        out
    }

    /// `ln E_y(jt)`, `E_y(jt) = sum_m jt^m / y_m!`, summed until the tail is
    /// below `1e-12` of the total.
    pub fn ln_series(&self, jt: f64) -> Result<f64> {
        if jt == 0.0 {
            return Ok(0.0);
        }
        let lx = jt.ln();
        let terms: Vec<f64> = (0..self.len()).map(|m| m as f64 * lx - self.ln_factorials[m]).collect();
        let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
        let last = *terms.last().unwrap();
        let rising = terms.len() >= 2 && terms[terms.len() - 1] >= terms[terms.len() - 2];
        let tail = (last - peak).exp() / total;
        if rising || tail > 1e-12 {
            return Err(Error::SeriesNotConverged { jt, tail });
        }
        Ok(peak + total.ln())
    }
}

/// Weight `w_y` tabulated on a log-spaced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWeight {
    pub grid: LogGrid,
    pub values: Vec<f64>,
}

/// `p_n(J) = jt^n / (y_n! E_y(jt))` with the moment-problem weight `w_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedGamma {
    pub y: YSequence,
    pub weight: DiscreteWeight,
    ln_series_at_nodes: Vec<f64>,
}

impl GeneralizedGamma {
    pub fn new(y: YSequence, weight: DiscreteWeight) -> Result<Self> {
        if weight.values.len() != weight.grid.len() {
            return Err(Error::InvalidFamily("weight values do not match grid nodes".into()));
        }
        if weight.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidFamily("weight values must be finite and >= 0".into()));
        }
        let ln_series_at_nodes = weight
            .grid
            .nodes
            .iter()
            .map(|&x| y.ln_series(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            y,
            weight,
            ln_series_at_nodes,
        })
    }

    fn ln_p_with(&self, n: usize, jt: f64, ln_series: f64) -> f64 {
        if jt == 0.0 {
            return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        n as f64 * jt.ln() - self.y.ln_factorial(n) - ln_series
    }

    pub fn eval(&self, n: usize, jt: f64) -> f64 {
        if n >= self.y.len() || jt < 0.0 {
            return 0.0;
        }
        match self.y.ln_series(jt) {
            Ok(ls) => self.ln_p_with(n, jt, ls).exp(),
            Err(_) => f64::NAN,
        }
    }

    fn ln_eval_at_node(&self, n: usize, i: usize) -> f64 {
        if n >= self.y.len() {
            return f64::NEG_INFINITY;
        }
        self.ln_p_with(n, self.weight.grid.nodes[i], self.ln_series_at_nodes[i])
    }

    /// `w_y(jt)` by linear interpolation in `ln jt`; zero off the grid.
    pub fn weight(&self, jt: f64) -> f64 {
        let nodes = &self.weight.grid.nodes;
        if jt < nodes[0] || jt > *nodes.last().unwrap() {
            return 0.0;
        }
        let i = nodes.partition_point(|x| *x <= jt).min(nodes.len() - 1).max(1);
        let (x0, x1) = (nodes[i - 1].ln(), nodes[i].ln());
        let s = if x1 > x0 { (jt.ln() - x0) / (x1 - x0) } else { 0.0 };
        self.weight.values[i - 1] * (1.0 - s) + self.weight.values[i] * s
    }

    fn grid_sum(&self, g: impl Fn(usize, f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, (x, q)) in self.weight.grid.nodes.iter().zip(&self.weight.grid.weights).enumerate() {
            acc.add(q * self.weight.values[i] * g(i, *x));
        }
        acc.value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityFamily {
    Gaussian(GaussianFamily),
    PerLevelGaussian(PerLevelGaussian),
    Gamma,
    GeneralizedGamma(GeneralizedGamma),
}

/// Gaussian family, default centres `jt_n = n`, or a finite family with the
/// given centres and common width.
pub fn gaussian_family(epsilon: f64, centers: Option<(i64, Vec<f64>)>) -> Result<ProbabilityFamily> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::NonpositiveWidth(epsilon));
    }
    match centers {
        None => Ok(ProbabilityFamily::Gaussian(GaussianFamily { epsilon })),
        Some((offset, centers)) => {
            let sigma = (0.5 / epsilon).sqrt();
            let sigmas = vec![sigma; centers.len()];
            Ok(ProbabilityFamily::PerLevelGaussian(PerLevelGaussian::new(
                offset, centers, sigmas,
            )?))
        }
    }
}

/// Discretely indexed gamma (Poisson) family `exp(-jt) jt^n / n!`.
pub fn gamma_family() -> ProbabilityFamily {
    ProbabilityFamily::Gamma
}

/// Generalized gamma family with the weight obtained by [`solve_weight`]
/// for the first `levels` levels on `grid`.
pub fn generalized_gamma_family(y: YSequence, grid: LogGrid, levels: usize) -> Result<ProbabilityFamily> {
    let sol = solve_weight(&y, levels, &grid)?;
    let weight = DiscreteWeight {
        grid,
        values: sol.values,
    };
    Ok(ProbabilityFamily::GeneralizedGamma(GeneralizedGamma::new(y, weight)?))
}

/// Envelope of `sqrt(p_n p_m)` (or `p_n` when `n == m`) for Gaussian kinds:
/// centre and precision of the product Gaussian.
fn gaussian_envelope(c_a: f64, s_a: f64, c_b: f64, s_b: f64) -> (f64, f64) {
    let pa = 0.25 / (s_a * s_a);
    let pb = 0.25 / (s_b * s_b);
    let precision = pa + pb;
    ((pa * c_a + pb * c_b) / precision, precision)
}

impl ProbabilityFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            ProbabilityFamily::Gaussian(_) => FamilyKind::Gaussian,
            ProbabilityFamily::PerLevelGaussian(_) => FamilyKind::PerLevelGaussian,
            ProbabilityFamily::Gamma => FamilyKind::Gamma,
            ProbabilityFamily::GeneralizedGamma(_) => FamilyKind::GeneralizedGamma,
        }
    }

    /// Rotation families live on Z x R, libration families on N x R+.
    pub fn motion(&self) -> MotionKind {
        match self {
            ProbabilityFamily::Gaussian(_) | ProbabilityFamily::PerLevelGaussian(_) => MotionKind::Rotation,
            ProbabilityFamily::Gamma | ProbabilityFamily::GeneralizedGamma(_) => MotionKind::Libration,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            ProbabilityFamily::Gaussian(g) => Some(g.epsilon),
            _ => None,
        }
    }

    pub fn contains_level(&self, n: i64) -> bool {
        match self {
            ProbabilityFamily::Gaussian(_) => true,
            ProbabilityFamily::PerLevelGaussian(f) => f.slot(n).is_some(),
            ProbabilityFamily::Gamma => n >= 0,
            ProbabilityFamily::GeneralizedGamma(g) => n >= 0 && (n as usize) < g.y.len(),
        }
    }

    /// `ln p_n(J)` at `jt = J / h`; `-inf` outside the support.
    pub fn ln_eval(&self, n: i64, jt: f64) -> f64 {
        match self {
            ProbabilityFamily::Gaussian(g) => {
                let d = jt - n as f64;
                0.5 * (g.epsilon / PI).ln() - g.epsilon * d * d
            }
            ProbabilityFamily::PerLevelGaussian(f) => match f.slot(n) {
                Some(i) => {
                    let s = f.sigmas[i];
                    let d = jt - f.centers[i];
                    -(d * d) / (2.0 * s * s) - 0.5 * (2.0 * PI * s * s).ln()
                }
                None => f64::NEG_INFINITY,
            },
            ProbabilityFamily::Gamma => {
                if n < 0 || jt < 0.0 {
                    return f64::NEG_INFINITY;
                }
                if jt == 0.0 {
                    return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                n as f64 * jt.ln() - jt - ln_factorial(n as u64)
            }
            ProbabilityFamily::GeneralizedGamma(g) => {
                if n < 0 || n as usize >= g.y.len() || jt < 0.0 {
                    return f64::NEG_INFINITY;
                }
                match g.y.ln_series(jt) {
                    Ok(ls) => g.ln_p_with(n as usize, jt, ls),
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// `p_n(J)` at `jt = J / h`.
    pub fn eval(&self, n: i64, jt: f64) -> f64 {
        self.ln_eval(n, jt).exp()
    }

    /// `sqrt(p_n(J) p_m(J))`, formed in the log domain.
    pub fn pair_density(&self, n: i64, m: i64, jt: f64) -> f64 {
        if n == m {
            self.eval(n, jt)
        } else {
            (0.5 * (self.ln_eval(n, jt) + self.ln_eval(m, jt))).exp()
        }
    }

    /// Weight `w(J)` of the moment condition; identically 1 except for the
    /// generalized gamma family.
    pub fn weight(&self, jt: f64) -> f64 {
        match self {
            ProbabilityFamily::GeneralizedGamma(g) => g.weight(jt),
            _ => 1.0,
        }
    }

    /// Levels whose contribution at `jt` is above the certified tail.
    pub fn level_range(&self, jt: f64) -> RangeInclusive<i64> {
        match self {
            ProbabilityFamily::Gaussian(g) => {
                let w = g.window_half_width();
                (jt.floor() as i64 - w)..=(jt.ceil() as i64 + w)
            }
            ProbabilityFamily::PerLevelGaussian(f) => f.levels(),
            ProbabilityFamily::Gamma => {
                let max = self.half_line_cutoff(jt, i64::MAX);
                0..=max
            }
            ProbabilityFamily::GeneralizedGamma(g) => {
                let max = self.half_line_cutoff(jt, g.y.len() as i64 - 1);
                0..=max
            }
        }
    }

    fn half_line_cutoff(&self, jt: f64, cap: i64) -> i64 {
        if jt <= 0.0 {
            return 0;
        }
        // Walk up past the mode until the terms drop below the cutoff. The
        // normalization of both half-line families is at most 1.
        let mut n = 0i64;
        let mut past_mode = false;
        loop {
            if n >= cap {
                return cap;
            }
            let p = self.eval(n, jt);
            let next = self.eval(n + 1, jt);
            if next < p {
                past_mode = true;
            }
            if past_mode && next < HALF_LINE_CUTOFF * 1e-2 && p < HALF_LINE_CUTOFF {
                return n;
            }
            n += 1;
        }
    }

    /// `N(J) = sum_n p_n(J)`, summed in ascending `n` over the certified
    /// window.
    pub fn normalization(&self, jt: f64) -> f64 {
        self.level_range(jt)
            .map(|n| self.eval(n, jt))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `int f(jt) p_n(J) w(J) d jt`.
    pub fn expectation(&self, n: i64, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.pair_integral(n, n, f)
    }

    /// `int f(jt) sqrt(p_n(J) p_m(J)) w(J) d jt`.
    pub fn pair_integral(&self, n: i64, m: i64, f: impl Fn(f64) -> f64) -> Result<f64> {
        if !self.contains_level(n) || !self.contains_level(m) {
            return Ok(0.0);
        }
        let not_converged = |change| Error::QuadratureNotConverged { change };
        let density = |x: f64| self.pair_density(n, m, x);
        match self {
            ProbabilityFamily::Gaussian(g) => {
                let s = g.sigma();
                let (center, precision) = gaussian_envelope(n as f64, s, m as f64, s);
                hermite_escalating(center, precision, |x| f(x) * density(x)).map_err(not_converged)
            }
            ProbabilityFamily::PerLevelGaussian(p) => {
                let (a, b) = (p.slot(n).unwrap(), p.slot(m).unwrap());
                let (center, precision) = gaussian_envelope(p.centers[a], p.sigmas[a], p.centers[b], p.sigmas[b]);
                hermite_escalating(center, precision, |x| f(x) * density(x)).map_err(not_converged)
            }
            ProbabilityFamily::Gamma => {
                let kind = if (n + m) % 2 == 0 {
                    RuleKind::Laguerre
                } else {
                    RuleKind::LaguerreHalf
                };
                laguerre_escalating(kind, |x| f(x) * density(x)).map_err(not_converged)
            }
            ProbabilityFamily::GeneralizedGamma(g) => {
                let (n, m) = (n as usize, m as usize);
                Ok(g.grid_sum(|i, x| {
                    let d = 0.5 * (g.ln_eval_at_node(n, i) + g.ln_eval_at_node(m, i));
                    f(x) * d.exp()
                }))
            }
        }
    }

    /// Like [`Self::expectation`], but splits the integration at `breaks`
    /// (in `jt`) where `f` is not smooth. Only Gaussian kinds need this; the
    /// half-line families ignore the break points.
    pub fn expectation_with_breaks(&self, n: i64, f: impl Fn(f64) -> f64, breaks: &[f64]) -> Result<f64> {
        let (center, precision) = match self {
            ProbabilityFamily::Gaussian(g) => (n as f64, g.epsilon),
            ProbabilityFamily::PerLevelGaussian(p) => match p.slot(n) {
                Some(i) => (p.centers[i], 0.5 / (p.sigmas[i] * p.sigmas[i])),
                None => return Ok(0.0),
            },
            _ => return self.expectation(n, f),
        };
        let half = (50.0 / precision).sqrt();
        let (lo, hi) = (center - half, center + half);
        if !breaks.iter().any(|b| *b > lo && *b < hi) {
            return self.expectation(n, f);
        }
        let scale = gauss_kronrod_split(|x| f(x).abs() * self.eval(n, x), lo, hi, breaks, 1e-8, 0.0)
            .map_err(|e| Error::QuadratureNotConverged { change: e })?;
        gauss_kronrod_split(|x| f(x) * self.eval(n, x), lo, hi, breaks, 1e-13, 1e-15 * scale)
            .map_err(|e| Error::QuadratureNotConverged { change: e })
    }

    /// `int p_n(J) w(J) d jt`; equals 1 for a valid family.
    pub fn level_mass(&self, n: i64) -> Result<f64> {
        self.expectation(n, |_| 1.0)
    }

    /// Correlation `varpi_{nm} = int sqrt(p_n p_m) w d jt`.
    pub fn correlation(&self, n: i64, m: i64) -> Result<f64> {
        self.pair_integral(n, m, |_| 1.0)
    }
}

/// `<E>_n = int E(J) p_n(J) w(J) d jt`, the energy average that must equal
/// `E_n + cst`.
pub fn energy_average(family: &ProbabilityFamily, model: &ClassicalModel, n: i64) -> Result<f64> {
    let h = model.planck();
    let failure = RefCell::new(None);
    let breaks: Vec<f64> = model.singular_actions().iter().map(|j| j / h).collect();
    let value = family.expectation_with_breaks(
        n,
        |jt| match model.energy_of_action(h * jt) {
            Ok(e) => e,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        },
        &breaks,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    value
}
