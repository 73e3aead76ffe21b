use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::MotionKind;
use crate::error::{Error, Result};
use crate::numeric::quadrature::gauss_kronrod;
use crate::numeric::roots::brent;

const ACTION_REL_TOL: f64 = 1e-13;

fn default_margin() -> f64 {
    1e-6
}

/// Simple pendulum `H = p^2 / (2 m l^2) + U0 (1 - cos q)`.
///
/// The branch selects libration (`E < 2 U0`) or rotation (`E > 2 U0`).
/// On the rotation branch `E(J)` is extended below the separatrix action
/// by the libration branch evaluated at `2 |J|`, which keeps `E(J)`
/// continuous and monotone in `|J|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pendulum {
    pub mass: f64,
    pub length: f64,
    pub u0: f64,
    pub hbar: f64,
    pub branch: MotionKind,
    /// Relative exclusion band around the separatrix energy `2 U0`.
    #[serde(default = "default_margin")]
    pub separatrix_margin: f64,
}

impl Pendulum {
    pub fn new(u0: f64, branch: MotionKind) -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            u0,
            hbar: 1.0,
            branch,
            separatrix_margin: default_margin(),
        }
    }

    /// Pendulum whose Schrodinger operator is `hbar^2 / (2 I)` times the
    /// Mathieu operator `-d^2/dq^2 + q_strength (1 - cos q)`.
    pub fn from_mathieu_strength(q_strength: f64, branch: MotionKind) -> Self {
        let mut p = Self::new(0.0, branch);
        p.u0 = q_strength * p.hbar * p.hbar / (2.0 * p.inertia());
        p
    }

    pub fn inertia(&self) -> f64 {
        self.mass * self.length * self.length
    }

    pub fn separatrix_energy(&self) -> f64 {
        2.0 * self.u0
    }

    pub fn potential(&self, q: f64) -> f64 {
        self.u0 * (1.0 - q.cos())
    }

    /// Libration action at the separatrix, `16 sqrt(I U0)`.
    pub fn libration_separatrix_action(&self) -> f64 {
        16.0 * (self.inertia() * self.u0).sqrt()
    }

    /// Rotation action at the separatrix, `8 sqrt(I U0)`.
    pub fn rotation_separatrix_action(&self) -> f64 {
        8.0 * (self.inertia() * self.u0).sqrt()
    }

    fn check_energy(&self, energy: f64) -> Result<()> {
        if !(energy >= 0.0) {
            return Err(Error::EnergyOutOfRange {
                energy,
                reason: "below the potential minimum",
            });
        }
        let sep = self.separatrix_energy();
        if (energy - sep).abs() <= self.separatrix_margin * sep {
            return Err(Error::EnergyOutOfRange {
                energy,
                reason: "inside the separatrix exclusion band",
            });
        }
        match self.branch {
            MotionKind::Libration if energy > sep => Err(Error::EnergyOutOfRange {
                energy,
                reason: "above the separatrix on the libration branch",
            }),
            MotionKind::Rotation if energy < sep => Err(Error::EnergyOutOfRange {
                energy,
                reason: "below the separatrix on the rotation branch",
            }),
            _ => Ok(()),
        }
    }

    pub fn action(&self, energy: f64) -> Result<f64> {
        self.check_energy(energy)?;
        match self.branch {
            MotionKind::Libration => self.libration_action(energy),
            MotionKind::Rotation => self.rotation_action(energy),
        }
    }

    /// `4 int_0^{q_t} p dq` with `sin(q/2) = k sin(phi)`, which removes the
    /// inverse-square-root behaviour at the turning point:
    /// `J = 16 sqrt(I U0) k^2 int_0^{pi/2} cos^2 phi / sqrt(1 - k^2 sin^2 phi) dphi`.
    pub(crate) fn libration_action(&self, energy: f64) -> Result<f64> {
        let k2 = (energy / self.separatrix_energy()).clamp(0.0, 1.0);
        if k2 == 0.0 {
            return Ok(0.0);
        }
        let integrand = |phi: f64| {
            let c = phi.cos();
            let s = phi.sin();
            c * c / (1.0 - k2 * s * s).max(0.0).sqrt().max(c.abs())
        };
        // For k < 1 the sqrt term is never below |cos phi|; the max only
        // guards k = 1, where the integrand reduces to cos phi.
        let integral = gauss_kronrod(integrand, 0.0, FRAC_PI_2, ACTION_REL_TOL, 0.0)
            .map_err(|e| Error::QuadratureNotConverged { change: e })?;
        Ok(16.0 * (self.inertia() * self.u0).sqrt() * k2 * integral)
    }

    /// `int_0^{2 pi} sqrt(2 I (E - U(q))) dq`, using the symmetry about `pi`.
    pub(crate) fn rotation_action(&self, energy: f64) -> Result<f64> {
        let two_i = 2.0 * self.inertia();
        let integrand = |q: f64| (two_i * (energy - self.potential(q)).max(0.0)).sqrt();
        let integral = gauss_kronrod(integrand, 0.0, PI, ACTION_REL_TOL, 0.0)
            .map_err(|e| Error::QuadratureNotConverged { change: e })?;
        Ok(2.0 * integral)
    }

    pub fn energy(&self, action: f64) -> Result<f64> {
        match self.branch {
            MotionKind::Libration => {
                if !(0.0..=self.libration_separatrix_action()).contains(&action) {
                    return Err(Error::ActionOutOfRange { action });
                }
                self.invert_libration(action)
            }
            MotionKind::Rotation => {
                let a = action.abs();
                if a < self.rotation_separatrix_action() {
                    self.invert_libration(2.0 * a)
                } else {
                    self.invert_rotation(a)
                }
            }
        }
    }

    fn invert_libration(&self, action: f64) -> Result<f64> {
        if action == 0.0 {
            return Ok(0.0);
        }
        let sep = self.separatrix_energy();
        if action >= self.libration_separatrix_action() {
            return Ok(sep);
        }
        self.invert(|e| self.libration_action(e), action, 0.0, sep)
    }

    fn invert_rotation(&self, action: f64) -> Result<f64> {
        let sep = self.separatrix_energy();
        let hi = action * action / (8.0 * PI * PI * self.inertia()) + sep;
        if action <= self.rotation_separatrix_action() {
            return Ok(sep);
        }
        self.invert(|e| self.rotation_action(e), action, sep, hi * (1.0 + 1e-12) + 1e-300)
    }

    fn invert(&self, j_of_e: impl Fn(f64) -> Result<f64>, target: f64, lo: f64, hi: f64) -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let root = brent(
            |e| match j_of_e(e) {
                Ok(j) => j - target,
                Err(err) => {
                    *failure.borrow_mut() = Some(err);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-15 * hi.abs().max(1e-300),
            200,
        );
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        root.ok_or(Error::ActionOutOfRange { action: target })
    }

    /// Central finite difference of `J(E)` with step `max(1e-6, 1e-6 |E|)`,
    /// shrunk to stay on the branch.
    pub fn period(&self, energy: f64) -> Result<f64> {
        self.check_energy(energy)?;
        let sep = self.separatrix_energy();
        let mut step = (1e-6 * energy.abs()).max(1e-6);
        let room = match self.branch {
            MotionKind::Libration => energy.min(sep - energy),
            MotionKind::Rotation => energy - sep,
        };
        step = step.min(0.5 * room);
        let f = |e: f64| match self.branch {
            MotionKind::Libration => self.libration_action(e),
            MotionKind::Rotation => self.rotation_action(e),
        };
        if step <= 0.0 {
            // E = 0 on the libration branch: harmonic limit.
            return Ok(2.0 * PI * (self.inertia() / self.u0).sqrt());
        }
        Ok((f(energy + step)? - f(energy - step)?) / (2.0 * step))
    }
}
