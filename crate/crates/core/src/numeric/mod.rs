//! Numerical building blocks shared by the physics modules.

pub mod quadrature;
pub mod roots;
pub mod sum;
pub mod tridiag;

pub use quadrature::{GaussRule, LogGrid, RuleKind};
pub use sum::{CompensatedSum, ComplexSum};
pub use tridiag::SymTridiagonal;

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 170 {
        (1..=n).map(|k| k as f64).product::<f64>().ln()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}
