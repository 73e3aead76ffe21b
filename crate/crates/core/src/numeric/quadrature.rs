//! Quadrature rules.
//!
//! Gauss rules come from the Jacobi matrix (Golub-Welsch) with nodes from
//! Sturm bisection and weights from the Christoffel function. Weights are
//! kept in "scaled" form `w_i / W(x_i)`, computed through orthonormal
//! functions `p_k(x) sqrt(W(x))`, so that integrands which already carry
//! their own Gaussian or exponential envelope can be evaluated as-is.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::sum::CompensatedSum;
use super::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Weight `exp(-x^2)` on the real line.
    Hermite,
    /// Weight `exp(-x)` on the half line.
    Laguerre,
    /// Weight `sqrt(x) exp(-x)` on the half line.
    LaguerreHalf,
}

impl RuleKind {
    fn alpha(self) -> f64 {
        match self {
            RuleKind::Hermite | RuleKind::Laguerre => 0.0,
            RuleKind::LaguerreHalf => 0.5,
        }
    }

    fn weight_sqrt(self, x: f64) -> f64 {
        match self {
            RuleKind::Hermite => (-0.5 * x * x).exp(),
            RuleKind::Laguerre => (-0.5 * x).exp(),
            RuleKind::LaguerreHalf => x.powf(0.25) * (-0.5 * x).exp(),
        }
    }

    fn total_mass(self) -> f64 {
        match self {
            RuleKind::Hermite => std::f64::consts::PI.sqrt(),
            RuleKind::Laguerre => 1.0,
            RuleKind::LaguerreHalf => 0.5 * std::f64::consts::PI.sqrt(),
        }
    }

    /// Recurrence coefficients (a_k, b_k) of the monic orthogonal polynomials.
    fn recurrence(self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match self {
            RuleKind::Hermite => (0.0, 0.5 * kf),
            RuleKind::Laguerre | RuleKind::LaguerreHalf => {
                let a = self.alpha();
                (2.0 * kf + 1.0 + a, kf * (kf + a))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    /// Classical Gauss weights `w_i`.
    pub weights: Vec<f64>,
    /// `w_i / W(x_i)`: integrates `g(x)` directly as `sum scaled_i g(x_i)`.
    pub scaled: Vec<f64>,
}

impl GaussRule {
    pub fn compute(kind: RuleKind, order: usize) -> Self {
        assert!(order >= 1);
        let diag: Vec<f64> = (0..order).map(|k| kind.recurrence(k).0).collect();
        let off: Vec<f64> = (1..order).map(|k| kind.recurrence(k).1.sqrt()).collect();
        let jacobi = SymTridiagonal::new(diag, off);
        let nodes = jacobi.eigenvalues();
        let mu0 = kind.total_mass();
        let mut weights = Vec::with_capacity(order);
        let mut scaled = Vec::with_capacity(order);
        for &x in &nodes {
            // Orthonormal functions phi_k = p_k sqrt(W).
            let mut prev = 0.0;
            let mut cur = kind.weight_sqrt(x) / mu0.sqrt();
            let mut christoffel = cur * cur;
            for k in 0..order - 1 {
                let (a, _) = kind.recurrence(k);
                let b_next = kind.recurrence(k + 1).1.sqrt();
                let b_cur = if k == 0 { 0.0 } else { kind.recurrence(k).1.sqrt() };
                let next = ((x - a) * cur - b_cur * prev) / b_next;
                prev = cur;
                cur = next;
                christoffel += cur * cur;
            }
            let s = 1.0 / christoffel;
            let w_sqrt = kind.weight_sqrt(x);
            scaled.push(s);
            weights.push(s * w_sqrt * w_sqrt);
        }
        Self {
            kind,
            nodes,
            weights,
            scaled,
        }
    }

    /// Shared cached rule.
    pub fn get(kind: RuleKind, order: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<HashMap<(RuleKind, usize), Arc<GaussRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&(kind, order)) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(GaussRule::compute(kind, order));
        cache
            .lock()
            .unwrap()
            .entry((kind, order))
            .or_insert_with(|| Arc::clone(&rule))
            .clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Orders tried by the escalating integrators.
pub const ESCALATION: [usize; 3] = [32, 64, 128];

/// Agreement required between successive orders, relative to the larger
/// of the result and the integral of `|g|`.
pub const ESCALATION_TOL: f64 = 1e-10;

/// Integrate `g` over the real line with a Gauss-Hermite rule mapped to a
/// Gaussian envelope `exp(-precision (x - center)^2)`. Orders escalate
/// 32 -> 64 -> 128 until successive results agree.
pub fn hermite_escalating(center: f64, precision: f64, g: impl Fn(f64) -> f64) -> Result<f64, f64> {
    let scale = 1.0 / precision.sqrt();
    escalate(RuleKind::Hermite, |rule| {
        let mut acc = CompensatedSum::new();
        let mut mag = CompensatedSum::new();
        for (t, s) in rule.nodes.iter().zip(&rule.scaled) {
            let v = s * g(center + scale * t);
            acc.add(v);
            mag.add(v.abs());
        }
        (acc.value() * scale, mag.value() * scale)
    })
}

/// Integrate `g` over the half line with a Gauss-Laguerre family rule,
/// `g` carrying its own `x^alpha exp(-x)` envelope.
pub fn laguerre_escalating(kind: RuleKind, g: impl Fn(f64) -> f64) -> Result<f64, f64> {
    escalate(kind, |rule| {
        let mut acc = CompensatedSum::new();
        let mut mag = CompensatedSum::new();
        for (x, s) in rule.nodes.iter().zip(&rule.scaled) {
            let v = s * g(*x);
            acc.add(v);
            mag.add(v.abs());
        }
        (acc.value(), mag.value())
    })
}

fn escalate(kind: RuleKind, eval: impl Fn(&GaussRule) -> (f64, f64)) -> Result<f64, f64> {
    let mut last: Option<f64> = None;
    let mut change = f64::INFINITY;
    for order in ESCALATION {
        let rule = GaussRule::get(kind, order);
        let (v, mag) = eval(&rule);
        if let Some(prev) = last {
            change = (v - prev).abs() / v.abs().max(prev.abs()).max(mag).max(1e-300);
            if change < ESCALATION_TOL || (v - prev).abs() < 1e-300 {
                return Ok(v);
            }
        }
        last = Some(v);
    }
    Err(change)
}

// Gauss-Kronrod 7-15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let fsum = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7-15) on `[a, b]`.
///
/// Returns `Err(estimated error)` when the interval budget is exhausted.
pub fn gauss_kronrod(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64, f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    intervals.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(intervals.iter().map(|iv| iv.2).collect::<CompensatedSum>().value());
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(err);
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Err(intervals.iter().map(|iv| iv.3).sum())
}

/// Adaptive Gauss-Kronrod over `[a, b]` split at interior break points.
pub fn gauss_kronrod_split(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, f64> {
    let mut cuts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);
    let mut acc = CompensatedSum::new();
    for w in cuts.windows(2) {
        acc.add(gauss_kronrod(&f, w[0], w[1], rel_tol, abs_tol)?);
    }
    Ok(acc.value())
}

/// Nodes on `(0, inf)` uniformly spaced in `ln x`, with trapezoid weights in
/// the log variable (`dx = x du`). The trapezoid rule in `u` converges
/// geometrically for integrands that decay exponentially at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, count: usize) -> Self {
        assert!(x_min > 0.0 && x_max > x_min && count >= 2);
        let (u0, u1) = (x_min.ln(), x_max.ln());
        let du = (u1 - u0) / (count - 1) as f64;
        let nodes: Vec<f64> = (0..count).map(|i| (u0 + du * i as f64).exp()).collect();
        Self::from_nodes(nodes)
    }

    /// Trapezoid-in-log weights for arbitrary increasing positive nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let u: Vec<f64> = nodes.iter().map(|x| x.ln()).collect();
        let weights = (0..n)
            .map(|i| {
                let left = if i > 0 { u[i] - u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { u[i + 1] - u[i] } else { 0.0 };
                0.5 * (left + right) * nodes[i]
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_integrates_moments() {
        let rule = GaussRule::get(RuleKind::Hermite, 32);
        let m0: f64 = rule.weights.iter().sum();
        let m2: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x * x).sum();
        let m4: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(4)).sum();
        let rpi = std::f64::consts::PI.sqrt();
        assert!((m0 - rpi).abs() < 1e-14);
        assert!((m2 - rpi / 2.0).abs() < 1e-14);
        assert!((m4 - 0.75 * rpi).abs() < 1e-13);
    }

    #[test]
    fn laguerre_moments_are_factorials() {
        let rule = GaussRule::get(RuleKind::Laguerre, 64);
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let mk: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
            assert!((mk / fact - 1.0).abs() < 1e-12, "k={k}: {mk} vs {fact}");
        }
    }

    #[test]
    fn half_laguerre_total_mass() {
        let rule = GaussRule::get(RuleKind::LaguerreHalf, 32);
        // int x^{3/2} e^{-x} = Gamma(5/2) = 3 sqrt(pi) / 4
        let m1: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x).sum();
        assert!((m1 - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn scaled_weights_match_plain_weights() {
        let rule = GaussRule::get(RuleKind::Hermite, 64);
        for ((x, w), s) in rule.nodes.iter().zip(&rule.weights).zip(&rule.scaled) {
            let rebuilt = s * (-x * x).exp();
            assert!((rebuilt - w).abs() <= 1e-13 * w.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn kronrod_handles_sqrt_endpoint() {
        let v = gauss_kronrod(|x| x.sqrt(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn kronrod_split_at_kink() {
        let v = gauss_kronrod_split(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1e-13, 0.0).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn log_grid_integrates_gamma_densities() {
        let grid = LogGrid::new(1e-16, 150.0, 300);
        for n in 0..10 {
            let mut fact = 1.0;
            for k in 1..=n {
                fact *= k as f64;
            }
            let v: f64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .map(|(x, w)| w * (-x).exp() * x.powi(n) / fact)
                .sum();
            assert!((v - 1.0).abs() < 1e-12, "n={n}: {v}");
        }
    }
}
