use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("energy {energy} outside the admissible range ({reason})")]
    EnergyOutOfRange { energy: f64, reason: &'static str },

    #[error("action {action} outside the model domain")]
    ActionOutOfRange { action: f64 },

    #[error("Mathieu truncation not converged: level {level} moved by {change:e} (relative) when doubling basis {basis_size}")]
    TruncationNotConverged {
        level: usize,
        change: f64,
        basis_size: usize,
    },

    #[error("width parameter must be positive, got {0}")]
    NonpositiveWidth(f64),

    #[error("invalid y-sequence: {0}")]
    InvalidSequence(String),

    #[error("series E_y did not converge at J~ = {jt} (tail {tail:e})")]
    SeriesNotConverged { jt: f64, tail: f64 },

    #[error("moment problem residual {residual:e} exceeds {limit:e}")]
    MomentResidualTooLarge { residual: f64, limit: f64 },

    #[error("quadrature did not converge (last relative change {change:e})")]
    QuadratureNotConverged { change: f64 },

    #[error("no bracket for level {level}: mean energy not monotone or no sign change on sigma in [{lo}, {hi}]")]
    NoBracket {
        level: i64,
        lo: f64,
        hi: f64,
        scanned: Vec<(f64, f64)>,
    },

    #[error("coherent state window [{n_min}, {n_max}] misses mass {missing:e} at J~ = {jt}")]
    EmptyWindow {
        jt: f64,
        n_min: i64,
        n_max: i64,
        missing: f64,
    },

    #[error("alpha difference between levels {n} and {m} is not a multiple of 2 pi / tau (k = {k})")]
    SelectionRuleViolation { n: i64, m: i64, k: f64 },

    #[error("|f + C| = {value:e} too small for the relative error at grid point {index}")]
    DivisionGuard { index: usize, value: f64 },

    #[error("operator windows differ: offset {left_offset}/dim {left_dim} vs offset {right_offset}/dim {right_dim}")]
    WindowMismatch {
        left_offset: i64,
        left_dim: usize,
        right_offset: i64,
        right_dim: usize,
    },

    #[error("configuration representation only exists for the free rotor")]
    UnsupportedModel,

    #[error("invalid family document: {0}")]
    InvalidFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Whether the error comes from bad input rather than from a
    /// computation that failed on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidFamily(_)
                | Error::InvalidArgument(_)
                | Error::InvalidSequence(_)
                | Error::NonpositiveWidth(_)
                | Error::SelectionRuleViolation { .. }
                | Error::UnsupportedModel
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
