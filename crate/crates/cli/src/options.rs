use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aacs", version, about = "Action-angle coherent-state quantization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sorted eigenvalues of the configured operator for each epsilon.
    Spectrum(Common),
    /// Lower symbol of the configured operator along gamma at fixed J~.
    LowerSymbol(Common),
    /// Phase-space density of the coherent state at the configured point.
    Husimi(Common),
    /// Density time series and upper-bound report.
    Evolve(Common),
    /// Per-level Gaussian widths reproducing a target spectrum.
    PendulumFit(Common),
    /// Invariant suite; exits 0 iff every check passes.
    Check(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::LowerSymbol(_) => "lower-symbol",
            Command::Husimi(_) => "husimi",
            Command::Evolve(_) => "evolve",
            Command::PendulumFit(_) => "pendulum-fit",
            Command::Check(_) => "check",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c)
            | Command::LowerSymbol(c)
            | Command::Husimi(c)
            | Command::Evolve(c)
            | Command::PendulumFit(c)
            | Command::Check(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Rotor,
    Oscillator,
    Pendulum,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Gamma,
    Gengamma,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlphaArg {
    Linear,
    Quadratic,
}

/// Flags shared by every command; each overrides the config key of the
/// same name.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Primary output file; sidecars are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, conflicts_with = "epsilon_list")]
    pub epsilon: Option<f64>,
    /// Comma-separated widths, e.g. `1e-7,0.3,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_list: Option<String>,
    #[arg(long, value_enum)]
    pub alpha: Option<AlphaArg>,
    #[arg(long)]
    pub nmax: Option<i64>,
    /// Entrywise tolerance of the operator identities.
    #[arg(long)]
    pub tol: Option<f64>,
}
