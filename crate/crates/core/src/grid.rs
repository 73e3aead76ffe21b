//! Tensor grids over the phase cylinder `(jt, gamma)` and optional times.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::quadrature::{GaussRule, RuleKind};

/// Default number of angle nodes per period.
pub const DEFAULT_GAMMA_NODES: usize = 257;
/// Default number of action nodes.
pub const DEFAULT_J_NODES: usize = 129;
/// Default action half-width in units of `1 / sqrt(eps)`.
pub const DEFAULT_J_SPAN: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub jt: Vec<f64>,
    /// Quadrature weights for `d jt`.
    pub jt_weights: Vec<f64>,
    /// Angle nodes in `[0, tau)`.
    pub gamma: Vec<f64>,
    /// Quadrature weights for `d gamma / tau`; they sum to 1.
    pub gamma_weights: Vec<f64>,
    pub tau: f64,
    pub times: Vec<f64>,
}

/// Uniformly spaced nodes on `[lo, hi]` with trapezoid weights.
pub fn trapezoid_nodes(lo: f64, hi: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 2 && hi > lo);
    let h = (hi - lo) / (count - 1) as f64;
    let nodes = (0..count).map(|i| lo + h * i as f64).collect();
    let weights = (0..count)
        .map(|i| if i == 0 || i == count - 1 { 0.5 * h } else { h })
        .collect();
    (nodes, weights)
}

impl PhaseGrid {
    /// Periodic trapezoid angle nodes `k tau / count`; with `midpoint` the
    /// nodes are shifted by half a cell, which avoids the sawtooth jump.
    pub fn new(jt: Vec<f64>, jt_weights: Vec<f64>, gamma_count: usize, tau: f64, midpoint: bool) -> Result<Self> {
        if jt.is_empty() || jt.len() != jt_weights.len() {
            return Err(Error::InvalidArgument(
                "action nodes and weights differ in length".into(),
            ));
        }
        if gamma_count == 0 || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument("need angle nodes and a positive period".into()));
        }
        let shift = if midpoint { 0.5 } else { 0.0 };
        let gamma = (0..gamma_count)
            .map(|k| tau * (k as f64 + shift) / gamma_count as f64)
            .collect();
        Ok(Self {
            jt,
            jt_weights,
            gamma,
            gamma_weights: vec![1.0 / gamma_count as f64; gamma_count],
            tau,
            times: vec![0.0],
        })
    }

    /// Uniform action nodes on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, jt_count: usize, gamma_count: usize, tau: f64) -> Result<Self> {
        if !(hi > lo) || jt_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "bad action range {lo}..{hi} / {jt_count}"
            )));
        }
        let (nodes, weights) = trapezoid_nodes(lo, hi, jt_count);
        Self::new(nodes, weights, gamma_count, tau, false)
    }

    /// `jt0 +- 6 / sqrt(eps)` with the default node counts; clipped at 0
    /// when `half_line` is set.
    pub fn around(jt0: f64, epsilon: f64, tau: f64, half_line: bool) -> Result<Self> {
        let half = DEFAULT_J_SPAN / epsilon.sqrt();
        let lo = if half_line { (jt0 - half).max(0.0) } else { jt0 - half };
        Self::uniform(lo, jt0 + half, DEFAULT_J_NODES, DEFAULT_GAMMA_NODES, tau)
    }

    /// Gauss-Laguerre action nodes on `(0, inf)`; weights integrate plain
    /// functions (the `exp(-x)` factor is divided out).
    pub fn laguerre(order: usize, gamma_count: usize, tau: f64) -> Result<Self> {
        let rule = GaussRule::get(RuleKind::Laguerre, order);
        Self::new(rule.nodes.clone(), rule.scaled.clone(), gamma_count, tau, false)
    }

    /// Gauss-Hermite action nodes `center + t / sqrt(precision)`.
    pub fn hermite(center: f64, precision: f64, order: usize, gamma_count: usize, tau: f64) -> Result<Self> {
        let rule = GaussRule::get(RuleKind::Hermite, order);
        let s = precision.sqrt();
        let nodes = rule.nodes.iter().map(|t| center + t / s).collect();
        let weights = rule.scaled.iter().map(|w| w / s).collect();
        Self::new(nodes, weights, gamma_count, tau, false)
    }

    pub fn with_times(mut self, times: Vec<f64>) -> Self {
        self.times = times;
        self
    }

    pub fn len(&self) -> usize {
        self.jt.len() * self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(jt, gamma)` pairs, action-major.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.jt
            .iter()
            .flat_map(move |&j| self.gamma.iter().map(move |&g| (j, g)))
    }

    /// `sum w_J w_gamma v` for values laid out like [`Self::points`].
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        let ng = self.gamma.len();
        let mut acc = crate::numeric::CompensatedSum::new();
        for (i, wj) in self.jt_weights.iter().enumerate() {
            for (k, wg) in self.gamma_weights.iter().enumerate() {
                acc.add(wj * wg * values[i * ng + k]);
            }
        }
        acc.value()
    }
}

/// `2 pi (gamma - gamma0) / tau`.
pub fn reduced_angle(gamma: f64, gamma0: f64, tau: f64) -> f64 {
    2.0 * PI * (gamma - gamma0) / tau
}

/// `(jt + jt0) / 2`.
pub fn mean_action(jt: f64, jt0: f64) -> f64 {
    0.5 * (jt + jt0)
}
