use serde::{Deserialize, Serialize};

use super::{gaussian_family, DiscreteWeight, GeneralizedGamma, PerLevelGaussian, ProbabilityFamily, YSequence};
use crate::error::{Error, Result};
use crate::numeric::quadrature::LogGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightGrid {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

/// On-disk description of a probability family.
///
/// `kind` is one of `gaussian`, `gamma`, `generalized_gamma`. A Gaussian
/// family is given either by `epsilon` (optionally with explicit `centers`)
/// or by per-level `centers` and `sigmas`; `offset` is the index of the
/// first listed level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigmas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_grid: Option<WeightGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<i64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidFamily(msg.into())
}

impl FamilyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family documents serialize")
    }

    fn ensure_empty(&self, field: &str, empty: bool) -> Result<()> {
        if empty {
            Ok(())
        } else {
            Err(invalid(format!("field `{field}` is not used by kind `{}`", self.kind)))
        }
    }

    pub fn to_family(&self) -> Result<ProbabilityFamily> {
        match self.kind.as_str() {
            "gaussian" => {
                self.ensure_empty("y", self.y.is_empty())?;
                self.ensure_empty("weight_grid", self.weight_grid.is_none())?;
                let offset = self.offset.unwrap_or(0);
                if !self.sigmas.is_empty() {
                    self.ensure_empty("epsilon", self.epsilon.is_none())?;
                    return Ok(ProbabilityFamily::PerLevelGaussian(PerLevelGaussian::new(
                        offset,
                        self.centers.clone(),
                        self.sigmas.clone(),
                    )?));
                }
                let eps = self
                    .epsilon
                    .ok_or_else(|| invalid("gaussian family needs `epsilon` or `sigmas`"))?;
                if self.centers.is_empty() {
                    self.ensure_empty("offset", self.offset.is_none())?;
                    gaussian_family(eps, None)
                } else {
                    gaussian_family(eps, Some((offset, self.centers.clone())))
                }
            }
            "gamma" => {
                let unused = self.epsilon.is_none()
                    && self.sigmas.is_empty()
                    && self.y.is_empty()
                    && self.centers.is_empty()
                    && self.weight_grid.is_none()
                    && self.offset.is_none();
                self.ensure_empty("epsilon/sigmas/y/centers/weight_grid/offset", unused)?;
                Ok(ProbabilityFamily::Gamma)
            }
            "generalized_gamma" => {
                let unused = self.epsilon.is_none()
                    && self.sigmas.is_empty()
                    && self.centers.is_empty()
                    && self.offset.is_none();
                self.ensure_empty("epsilon/sigmas/centers/offset", unused)?;
                let y = YSequence::new(self.y.clone())?;
                let grid = self
                    .weight_grid
                    .as_ref()
                    .ok_or_else(|| invalid("generalized_gamma family needs `weight_grid`"))?;
                if grid.nodes.len() < 2 || grid.nodes.len() != grid.values.len() {
                    return Err(invalid("weight_grid needs matching nodes and values, at least two"));
                }
                if grid.nodes[0] <= 0.0
                    || grid.nodes.windows(2).any(|w| !(w[1] > w[0]))
                    || grid.nodes.iter().any(|x| !x.is_finite())
                {
                    return Err(invalid("weight_grid nodes must be positive, finite and increasing"));
                }
                let weight = DiscreteWeight {
                    grid: LogGrid::from_nodes(grid.nodes.clone()),
                    values: grid.values.clone(),
                };
                Ok(ProbabilityFamily::GeneralizedGamma(GeneralizedGamma::new(y, weight)?))
            }
            other => Err(invalid(format!("unknown family kind `{other}`"))),
        }
    }

    pub fn from_family(family: &ProbabilityFamily) -> Self {
        match family {
            ProbabilityFamily::Gaussian(g) => Self {
                kind: "gaussian".into(),
                epsilon: Some(g.epsilon),
                ..Self::default()
            },
            ProbabilityFamily::PerLevelGaussian(p) => Self {
                kind: "gaussian".into(),
                sigmas: p.sigmas.clone(),
                centers: p.centers.clone(),
                offset: Some(p.offset),
                ..Self::default()
            },
            ProbabilityFamily::Gamma => Self {
                kind: "gamma".into(),
                ..Self::default()
            },
            ProbabilityFamily::GeneralizedGamma(g) => Self {
                kind: "generalized_gamma".into(),
                y: g.y.values().to_vec(),
                weight_grid: Some(WeightGrid {
                    nodes: g.weight.grid.nodes.clone(),
                    values: g.weight.values.clone(),
                }),
                ..Self::default()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let g = FamilyDocument::from_json(r#"{"kind":"gaussian","epsilon":2.0}"#).unwrap();
        assert_eq!(g.to_family().unwrap().epsilon(), Some(2.0));
        let p = FamilyDocument::from_json(r#"{"kind":"gaussian","sigmas":[0.5,0.6],"centers":[1.0,2.5],"offset":3}"#)
            .unwrap();
        let fam = p.to_family().unwrap();
        assert!(fam.contains_level(4) && !fam.contains_level(5));
        assert_eq!(FamilyDocument::from_family(&fam), p);
        let gm = FamilyDocument::from_json(r#"{"kind":"gamma"}"#).unwrap();
        assert_eq!(gm.to_family().unwrap(), ProbabilityFamily::Gamma);
    }

    #[test]
    fn rejects_malformed_documents() {
        for text in [
            r#"{"kind":"gaussian"}"#,
            r#"{"kind":"gaussian","epsilon":-1}"#,
            r#"{"kind":"gaussian","epsilon":1,"sigmas":[1.0],"centers":[0.0]}"#,
            r#"{"kind":"gamma","epsilon":1}"#,
            r#"{"kind":"generalized_gamma","y":[0,1,2]}"#,
            r#"{"kind":"lorentzian"}"#,
            r#"{"kind":"gamma","colour":1}"#,
        ] {
            let parsed = FamilyDocument::from_json(text).and_then(|d| d.to_family());
            assert!(parsed.is_err(), "{text}");
        }
    }
}
