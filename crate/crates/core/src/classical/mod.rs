//! Classical action-angle layer: energy/action maps, periods, angle
//! evolution, and the quantum pendulum reference spectrum.
//!
//! Conventions: `hbar` defaults to 1, so `h = 2 pi`; the moment of inertia
//! is `mass * length^2`. All actions are in physical units (`J`, not
//! `J / h`).

mod mathieu;
mod pendulum;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mathieu::{mathieu_eigenvalues, MathieuSpectrum};
pub use pendulum::Pendulum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    /// Closed phase trajectory: `J >= 0`, levels indexed by `n >= 0`.
    Libration,
    /// Open trajectory periodic in `q`: `J` real, levels indexed by `n` in Z.
    Rotation,
}

/// Mass on a circle of radius `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeRotor {
    pub mass: f64,
    pub length: f64,
    pub hbar: f64,
}

impl Default for FreeRotor {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            hbar: 1.0,
        }
    }
}

impl FreeRotor {
    pub fn inertia(&self) -> f64 {
        self.mass * self.length * self.length
    }

    /// `h^2 / (8 pi^2 m l^2)`: the energy of one unit of `J / h` squared.
    pub fn energy_unit(&self) -> f64 {
        let h = 2.0 * PI * self.hbar;
        h * h / (8.0 * PI * PI * self.inertia())
    }

    /// `t~ = hbar t / (2 m l^2)`.
    pub fn reduced_time(&self, t: f64) -> f64 {
        self.hbar * t / (2.0 * self.inertia())
    }

    pub fn time_from_reduced(&self, t_reduced: f64) -> f64 {
        2.0 * self.inertia() * t_reduced / self.hbar
    }

    /// Circumference `L = 2 pi l` of the configuration circle.
    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicOscillator {
    pub omega: f64,
    pub hbar: f64,
}

impl Default for HarmonicOscillator {
    fn default() -> Self {
        Self { omega: 1.0, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalModel {
    Rotor(FreeRotor),
    Oscillator(HarmonicOscillator),
    Pendulum(Pendulum),
}

impl ClassicalModel {
    pub fn kind(&self) -> MotionKind {
        match self {
            ClassicalModel::Rotor(_) => MotionKind::Rotation,
            ClassicalModel::Oscillator(_) => MotionKind::Libration,
            ClassicalModel::Pendulum(p) => p.branch,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            ClassicalModel::Rotor(r) => r.hbar,
            ClassicalModel::Oscillator(o) => o.hbar,
            ClassicalModel::Pendulum(p) => p.hbar,
        }
    }

    /// Planck's constant `h = 2 pi hbar`.
    pub fn planck(&self) -> f64 {
        2.0 * PI * self.hbar()
    }

    /// `J(E)`, the loop integral of `p dq` over one period. Always `>= 0`.
    pub fn action_from_energy(&self, energy: f64) -> Result<f64> {
        match self {
            ClassicalModel::Rotor(r) => {
                if !(energy >= 0.0) {
                    return Err(Error::EnergyOutOfRange {
                        energy,
                        reason: "below the rotor minimum",
                    });
                }
                Ok((8.0 * PI * PI * r.inertia() * energy).sqrt())
            }
            ClassicalModel::Oscillator(o) => {
                if !(energy >= 0.0) {
                    return Err(Error::EnergyOutOfRange {
                        energy,
                        reason: "below the oscillator minimum",
                    });
                }
                Ok(2.0 * PI * energy / o.omega)
            }
            ClassicalModel::Pendulum(p) => p.action(energy),
        }
    }

    /// `E(J)`, inverse of [`Self::action_from_energy`]. For rotation models
    /// this is even in `J`.
    pub fn energy_of_action(&self, action: f64) -> Result<f64> {
        match self {
            ClassicalModel::Rotor(r) => Ok(action * action / (8.0 * PI * PI * r.inertia())),
            ClassicalModel::Oscillator(o) => {
                if action < 0.0 {
                    return Err(Error::ActionOutOfRange { action });
                }
                Ok(o.omega * action / (2.0 * PI))
            }
            ClassicalModel::Pendulum(p) => p.energy(action),
        }
    }

    /// `tau(E) = dJ/dE`, the period of motion at fixed energy.
    pub fn period_of_energy(&self, energy: f64) -> Result<f64> {
        match self {
            ClassicalModel::Rotor(r) => {
                let j = self.action_from_energy(energy)?;
                if j == 0.0 {
                    return Err(Error::EnergyOutOfRange {
                        energy,
                        reason: "rotor at rest has no finite period",
                    });
                }
                Ok(4.0 * PI * PI * r.inertia() / j)
            }
            ClassicalModel::Oscillator(o) => {
                self.action_from_energy(energy)?;
                Ok(2.0 * PI / o.omega)
            }
            ClassicalModel::Pendulum(p) => p.period(energy),
        }
    }

    /// Actions where `E(J)` is not smooth; integrators split there.
    pub fn singular_actions(&self) -> Vec<f64> {
        match self {
            ClassicalModel::Pendulum(p) if p.branch == MotionKind::Rotation => {
                let js = p.rotation_separatrix_action();
                vec![-js, 0.0, js]
            }
            _ => Vec::new(),
        }
    }
}

/// `gamma = nu t + gamma_0`, reduced into `[0, tau)`.
pub fn angle_evolution(gamma0: f64, nu: f64, t: f64, tau: f64) -> f64 {
    let g = (nu * t + gamma0).rem_euclid(tau);
    // rem_euclid can round up to tau itself for tiny negative inputs.
    if g >= tau {
        0.0
    } else {
        g
    }
}
