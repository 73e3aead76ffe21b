use serde::{Deserialize, Serialize};

use super::{energy_average, PerLevelGaussian, ProbabilityFamily};
use crate::classical::ClassicalModel;
use crate::error::{Error, Result};
use crate::numeric::roots::brent;

const SIGMA_MIN: f64 = 1e-3;
const SIGMA_MAX: f64 = 1e3;
const SCAN_POINTS: usize = 41;

/// How the constant shift `cst` in `<E>_n = E_n + cst` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftAnchor {
    Fixed(f64),
    /// `cst` is whatever the first target level gives at this width.
    Reference {
        sigma: f64,
    },
}

impl Default for ShiftAnchor {
    fn default() -> Self {
        ShiftAnchor::Reference {
            sigma: std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaFit {
    pub levels: Vec<i64>,
    pub energies: Vec<f64>,
    /// Centres in physical action units.
    pub centers: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `|<E>_n - E_n - cst|` at the fitted widths.
    pub residuals: Vec<f64>,
    pub cst: f64,
}

impl SigmaFit {
    /// The fitted family, in `jt` units, with levels numbered from the
    /// first target.
    pub fn family(&self, planck: f64) -> Result<ProbabilityFamily> {
        let centers = self.centers.iter().map(|c| c / planck).collect();
        Ok(ProbabilityFamily::PerLevelGaussian(PerLevelGaussian::new(
            self.levels[0],
            centers,
            self.sigmas.clone(),
        )?))
    }
}

/// Classical actions `J(E_n)` of the target energies.
pub fn classical_centers(model: &ClassicalModel, energies: &[f64]) -> Result<Vec<f64>> {
    energies.iter().map(|&e| model.action_from_energy(e)).collect()
}

fn mean_energy(model: &ClassicalModel, center_jt: f64, sigma: f64) -> Result<f64> {
    let single = ProbabilityFamily::PerLevelGaussian(PerLevelGaussian::new(0, vec![center_jt], vec![sigma])?);
    energy_average(&single, model, 0)
}

/// Widths `sigma_n` (in `jt` units) of Gaussians centred on `centers`
/// (physical actions) such that `<E>_n = E_n + cst`.
pub fn fit_sigma(
    model: &ClassicalModel,
    levels: &[i64],
    energies: &[f64],
    centers: &[f64],
    anchor: ShiftAnchor,
) -> Result<SigmaFit> {
    if levels.is_empty() || levels.len() != energies.len() || levels.len() != centers.len() {
        return Err(Error::InvalidArgument(format!(
            "{} levels, {} energies, {} centers",
            levels.len(),
            energies.len(),
            centers.len()
        )));
    }
    let h = model.planck();
    let cst = match anchor {
        ShiftAnchor::Fixed(c) => c,
        ShiftAnchor::Reference { sigma } => mean_energy(model, centers[0] / h, sigma)? - energies[0],
    };

    let ratio = (SIGMA_MAX / SIGMA_MIN).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| SIGMA_MIN * ratio.powi(i as i32)).collect();

    let mut sigmas = Vec::with_capacity(levels.len());
    let mut residuals = Vec::with_capacity(levels.len());
    for ((&level, &energy), &center) in levels.iter().zip(energies).zip(centers) {
        let c = center / h;
        let target = energy + cst;
        let g = |s: f64| mean_energy(model, c, s).map(|e| e - target);
        let scanned: Vec<(f64, f64)> = grid.iter().map(|&s| g(s).map(|v| (s, v))).collect::<Result<_>>()?;

        let scale = target.abs().max(1e-300);
        let monotone = scanned.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-10 * scale);
        let bracket = scanned.windows(2).find(|w| w[0].1 <= 0.0 && w[1].1 >= 0.0);
        let (lo, hi) = match (monotone, bracket) {
            (true, Some(w)) => (w[0].0, w[1].0),
            _ => {
                return Err(Error::NoBracket {
                    level,
                    lo: SIGMA_MIN,
                    hi: SIGMA_MAX,
                    scanned,
                })
            }
        };
        let sigma = if scanned.iter().any(|(s, v)| *s == lo && *v == 0.0) {
            lo
        } else {
            let failure = std::cell::RefCell::new(None);
            let root = brent(
                |s| match g(s) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                },
                lo,
                hi,
                1e-14 * hi,
                200,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            root.ok_or(Error::NoBracket {
                level,
                lo,
                hi,
                scanned: Vec::new(),
            })?
        };
        residuals.push(g(sigma)?.abs());
        sigmas.push(sigma);
    }
    Ok(SigmaFit {
        levels: levels.to_vec(),
        energies: energies.to_vec(),
        centers: centers.to_vec(),
        sigmas,
        residuals,
        cst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::FreeRotor;

    #[test]
    fn rotor_self_fit_recovers_common_width() {
        // <E>_n = unit (n^2 + sigma^2) for integer centres, so cst = unit / 2
        // corresponds to sigma = 1 / sqrt(2).
        let rotor = FreeRotor::default();
        let model = ClassicalModel::Rotor(rotor);
        let unit = rotor.energy_unit();
        let levels: Vec<i64> = (1..=4).collect();
        let energies: Vec<f64> = levels.iter().map(|n| unit * (n * n) as f64).collect();
        let centers = classical_centers(&model, &energies).unwrap();
        let fit = fit_sigma(&model, &levels, &energies, &centers, ShiftAnchor::Fixed(0.5 * unit)).unwrap();
        for s in &fit.sigmas {
            assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10, "{s}");
        }
    }

    #[test]
    fn unreachable_target_reports_scan() {
        let model = ClassicalModel::Rotor(FreeRotor::default());
        let err = fit_sigma(
            &model,
            &[1],
            &[0.5],
            &[2.0 * std::f64::consts::PI],
            ShiftAnchor::Fixed(-1.0),
        )
        .unwrap_err();
        match err {
            Error::NoBracket { scanned, .. } => assert_eq!(scanned.len(), SCAN_POINTS),
            other => panic!("{other:?}"),
        }
    }
}
