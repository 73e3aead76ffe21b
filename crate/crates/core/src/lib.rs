//! Action-angle coherent states.
//!
//! Families of probability distributions `n -> p_n(J)` over the action
//! variable whose energy averages reproduce a prescribed spectrum, the
//! coherent states they generate, the quantization map `f -> A_f` (with a
//! bounded angle operator), and free-rotor time evolution.
//!
//! Modules follow the computation from classical mechanics to dynamics:
//!
//! - [`classical`]: `E(J)`, `J(E)`, periods, and the Mathieu spectrum.
//! - [`family`]: probability families, normalization, moment problem, fits.
//! - [`quantizer`]: coherent states, overlaps, operators, lower symbols.
//! - [`dynamics`]: evolution, phase-space densities, upper bounds.
//! - [`config`]: the JSON run configuration shared with the CLI.

pub mod classical;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod family;
pub mod grid;
pub mod numeric;
pub mod quantizer;

pub use error::{Error, Result};
