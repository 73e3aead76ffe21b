//! The JSON run configuration shared by every CLI command.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalModel, FreeRotor, MotionKind, Pendulum};
use crate::dynamics::BoundForm;
use crate::error::{Error, Result};
use crate::family::{generalized_gamma_family, FamilyDocument, ProbabilityFamily, ShiftAnchor, YSequence};
use crate::grid::{trapezoid_nodes, PhaseGrid, DEFAULT_GAMMA_NODES, DEFAULT_J_NODES, DEFAULT_J_SPAN};
use crate::numeric::quadrature::LogGrid;
use crate::quantizer::{AlphaRule, CsFrame, DEFAULT_TAIL_TOL};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

/// Which operator `spectrum` diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    Angle,
    Action,
    Energy,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Window {
    /// Lowest level; defaults to `-nmax` for rotation families and `0`
    /// otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmin: Option<i64>,
    pub nmax: i64,
}

impl Default for Window {
    fn default() -> Self {
        Self { nmin: None, nmax: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub j_nodes: usize,
    pub gamma_nodes: usize,
    /// Action half-width in units of `1 / sqrt(eps)`.
    pub j_span: f64,
    /// Shift the angle nodes by half a cell.
    pub midpoint: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            j_nodes: DEFAULT_J_NODES,
            gamma_nodes: DEFAULT_GAMMA_NODES,
            j_span: DEFAULT_J_SPAN,
            midpoint: false,
        }
    }
}

/// Initial point of `husimi` and `evolve`, and the action of the
/// `lower-symbol` cut, all in `jt = J / h` units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhasePoint {
    pub j_tilde: f64,
    pub gamma: f64,
}

impl Default for PhasePoint {
    fn default() -> Self {
        Self {
            j_tilde: 0.5,
            gamma: PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneralizedGammaConfig {
    /// Length of the default sequence `y_n = n` when the family gives none.
    pub levels: usize,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_nodes: usize,
}

impl Default for GeneralizedGammaConfig {
    fn default() -> Self {
        Self {
            levels: 400,
            weight_min: 1e-12,
            weight_max: 150.0,
            weight_nodes: 240,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumFitConfig {
    pub q_strength: f64,
    /// Sorted Mathieu level indices to fit.
    pub levels: Vec<i64>,
    pub basis_size: usize,
    pub anchor: ShiftAnchor,
}

impl Default for PendulumFitConfig {
    fn default() -> Self {
        Self {
            q_strength: 1.0,
            levels: (3..=8).collect(),
            basis_size: 64,
            anchor: ShiftAnchor::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Normalization mass a coherent state may lose to the window.
    pub tail: f64,
    /// Entrywise tolerance of operator identities.
    pub operator: f64,
    /// Allowed excess of a density over its upper bound.
    pub bound: f64,
    /// Deviation of the quantized constant from the identity.
    pub resolution: f64,
    /// Deviation of the stability overlap modulus from one.
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tail: DEFAULT_TAIL_TOL,
            operator: 1e-12,
            bound: 1e-10,
            resolution: 1e-8,
            stability: 1e-10,
        }
    }
}

fn default_model() -> ClassicalModel {
    ClassicalModel::Rotor(FreeRotor::default())
}

fn default_family() -> FamilyDocument {
    FamilyDocument {
        kind: "gaussian".into(),
        epsilon: Some(1.0),
        ..FamilyDocument::default()
    }
}

fn default_tau() -> f64 {
    2.0 * PI
}

fn default_times() -> Vec<f64> {
    vec![0.0, 0.3, 1.0, 3.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: ClassicalModel,
    #[serde(default = "default_family")]
    pub family: FamilyDocument,
    #[serde(default = "AlphaRule::default_rule")]
    pub alpha: AlphaRule,
    #[serde(default)]
    pub window: Window,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Parameter sweep of `spectrum` and `lower-symbol`; absent means the
    /// family's own `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(default)]
    pub operator: OperatorKind,
    #[serde(default)]
    pub point: PhasePoint,
    #[serde(default)]
    pub grid: GridConfig,
    /// Times of `evolve`; reduced times `hbar t / (2 m l^2)` for the rotor.
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub bound_form: BoundForm,
    #[serde(default)]
    pub generalized_gamma: GeneralizedGammaConfig,
    #[serde(default)]
    pub pendulum_fit: PendulumFitConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Perturbation added to the correlation matrix by `check`, to show
    /// that the suite notices it.
    #[serde(default)]
    pub varpi_perturbation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

impl AlphaRule {
    fn default_rule() -> Self {
        AlphaRule::Linear
    }
}

/// Parses `a,b,c` into positive finite widths.
pub fn parse_epsilon_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(invalid("empty epsilon list"));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let eps: f64 = item.parse().map_err(|_| invalid(format!("`{item}` is not a number")))?;
            if eps > 0.0 && eps.is_finite() {
                Ok(eps)
            } else {
                Err(invalid(format!("epsilon {item} must be positive and finite")))
            }
        })
        .collect()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau {} must be positive", self.tau)));
        }
        if let Some(nmin) = self.window.nmin {
            if nmin > self.window.nmax {
                return Err(invalid(format!("window {nmin}..={} is empty", self.window.nmax)));
            }
        }
        if self.window.nmax < 0 {
            return Err(invalid("nmax must be >= 0"));
        }
        if let Some(list) = &self.epsilon_list {
            if list.is_empty() {
                return Err(invalid("empty epsilon list"));
            }
            if let Some(eps) = list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                return Err(invalid(format!("epsilon {eps} must be positive and finite")));
            }
        }
        if self.grid.j_nodes < 2 || self.grid.gamma_nodes == 0 || !(self.grid.j_span > 0.0) {
            return Err(invalid(
                "grid needs >= 2 action nodes, >= 1 angle node and a positive span",
            ));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times must be finite"));
        }
        let tol = &self.tolerances;
        if [tol.tail, tol.operator, tol.bound, tol.resolution, tol.stability]
            .iter()
            .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return Err(invalid("tolerances must be finite and >= 0"));
        }
        if !self.varpi_perturbation.is_finite() {
            return Err(invalid("varpi_perturbation must be finite"));
        }
        Ok(())
    }

    /// Whether the family is parametrized by a single width `epsilon`.
    pub fn sweeps_epsilon(&self) -> bool {
        self.family.kind == "gaussian" && self.family.sigmas.is_empty()
    }

    /// The sweep values, falling back to the family's own `epsilon`; a
    /// single `None` for families without a width parameter.
    pub fn epsilons(&self) -> Result<Vec<Option<f64>>> {
        if !self.sweeps_epsilon() {
            return Ok(vec![None]);
        }
        match (&self.epsilon_list, self.family.epsilon) {
            (Some(list), _) if list.is_empty() => Err(invalid("empty epsilon list")),
            (Some(list), _) => Ok(list.iter().map(|e| Some(*e)).collect()),
            (None, Some(e)) => Ok(vec![Some(e)]),
            (None, None) => Err(invalid("gaussian family needs `epsilon`")),
        }
    }

    /// Angle-action grid around `point.j_tilde` with the configured node
    /// counts: `+- j_span / sqrt(eps)`, or `+- j_span sqrt(jt0 + 1)` on the
    /// half-line for families without a width.
    pub fn phase_grid(&self, family: &ProbabilityFamily) -> Result<PhaseGrid> {
        let jt0 = self.point.j_tilde;
        let span = self.grid.j_span;
        let (lo, hi) = match family.epsilon() {
            Some(eps) => (jt0 - span / eps.sqrt(), jt0 + span / eps.sqrt()),
            None => {
                let half = span * (jt0.abs() + 1.0).sqrt();
                (jt0 - half, jt0 + half)
            }
        };
        let lo = if family.motion() == MotionKind::Rotation {
            lo
        } else {
            lo.max(0.0)
        };
        let (nodes, weights) = trapezoid_nodes(lo, hi, self.grid.j_nodes);
        PhaseGrid::new(nodes, weights, self.grid.gamma_nodes, self.tau, self.grid.midpoint)
    }

    /// Model selected by name with default parameters; a pendulum uses the
    /// fit's Mathieu strength on the rotation branch.
    pub fn model_named(&self, name: &str) -> Result<ClassicalModel> {
        match name {
            "rotor" => Ok(ClassicalModel::Rotor(FreeRotor::default())),
            "oscillator" => Ok(ClassicalModel::Oscillator(Default::default())),
            "pendulum" => Ok(ClassicalModel::Pendulum(Pendulum::from_mathieu_strength(
                self.pendulum_fit.q_strength,
                MotionKind::Rotation,
            ))),
            other => Err(invalid(format!("unknown model `{other}`"))),
        }
    }

    /// The family document with `epsilon` replaced, for sweeps.
    pub fn family_at(&self, epsilon: Option<f64>) -> Result<ProbabilityFamily> {
        if self.family.kind == "generalized_gamma" && self.family.weight_grid.is_none() {
            let gg = &self.generalized_gamma;
            let y = if self.family.y.is_empty() {
                YSequence::identity(gg.levels)
            } else {
                YSequence::new(self.family.y.clone())?
            };
            let levels = y.len();
            let grid = LogGrid::new(gg.weight_min, gg.weight_max, gg.weight_nodes);
            return generalized_gamma_family(y, grid, levels);
        }
        let mut doc = self.family.clone();
        if let Some(e) = epsilon {
            if doc.kind == "gaussian" && doc.sigmas.is_empty() {
                doc.epsilon = Some(e);
            }
        }
        doc.to_family()
    }

    /// Level window for `family`: the configured one, clipped to the
    /// family's index set.
    pub fn window_for(&self, family: &ProbabilityFamily) -> RangeInclusive<i64> {
        if let ProbabilityFamily::PerLevelGaussian(p) = family {
            return p.levels();
        }
        let nmax = self.window.nmax;
        let nmin = match self.window.nmin {
            Some(n) => n,
            None if family.motion() == MotionKind::Rotation => -nmax,
            None => 0,
        };
        if let ProbabilityFamily::GeneralizedGamma(g) = family {
            return nmin.max(0)..=nmax.min(g.y.len() as i64 - 1);
        }
        nmin..=nmax
    }

    pub fn frame(&self, family: ProbabilityFamily) -> Result<CsFrame> {
        let window = self.window_for(&family);
        Ok(CsFrame::new(family, self.alpha.clone(), self.tau, window)?
            .with_planck(self.model.planck())
            .with_tail_tol(self.tolerances.tail))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c.window.nmax, 32);
        assert_eq!(c.alpha, AlphaRule::Linear);
        assert_eq!(c.epsilons().unwrap(), vec![Some(1.0)]);
        assert!(RunConfig::from_json(r#"{"epsilon_list": []}"#).is_err());
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_json(r#"{"nmax": 3}"#),
            Err(Error::InvalidConfig(_))
        ));
        assert!(RunConfig::from_json(r#"{"grid": {"j_nodes": 3, "extra": 1}}"#).is_err());
    }

    #[test]
    fn custom_alpha_round_trips() {
        let c = RunConfig::from_json(r#"{"alpha": {"custom": [0.0, 1.0, 2.0]}, "window": {"nmin": 0, "nmax": 2}}"#)
            .unwrap();
        assert_eq!(c.alpha, AlphaRule::Custom(vec![0.0, 1.0, 2.0]));
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn epsilon_lists() {
        assert_eq!(parse_epsilon_list("1e-7, 0.3,1").unwrap(), vec![1e-7, 0.3, 1.0]);
        assert!(parse_epsilon_list("").is_err());
        assert!(parse_epsilon_list("1,,2").is_err());
        assert!(parse_epsilon_list("0").is_err());
        assert!(parse_epsilon_list("nan").is_err());
    }

    #[test]
    fn windows_follow_motion() {
        let c = RunConfig::default();
        let g = c.family_at(None).unwrap();
        assert_eq!(c.window_for(&g), -32..=32);
        let gamma = crate::family::gamma_family();
        assert_eq!(c.window_for(&gamma), 0..=32);
    }
}
