use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SymTridiagonal;

/// Lowest eigenvalues of `-d^2/dq^2 + q_strength (1 - cos q)` on
/// `2 pi`-periodic functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuSpectrum {
    pub q_strength: f64,
    pub levels: Vec<f64>,
    /// Fourier cutoff `N` of the basis `e^{i n q}`, `|n| <= N`.
    pub truncation: usize,
}

impl MathieuSpectrum {
    /// Pendulum energies `hbar^2 / (2 I) * level` for the pendulum built by
    /// [`super::Pendulum::from_mathieu_strength`].
    pub fn pendulum_energies(&self, inertia: f64, hbar: f64) -> Vec<f64> {
        let unit = hbar * hbar / (2.0 * inertia);
        self.levels.iter().map(|l| unit * l).collect()
    }
}

fn fourier_matrix(q_strength: f64, cutoff: usize) -> SymTridiagonal {
    let n = cutoff as i64;
    let diag = (-n..=n).map(|k| (k * k) as f64 + q_strength).collect();
    let off = vec![-0.5 * q_strength; 2 * cutoff];
    SymTridiagonal::new(diag, off)
}

/// Diagonalizes the pendulum Hamiltonian in the Fourier basis of size
/// `2 basis_size + 1` and checks the requested levels against a basis of
/// twice the size.
pub fn mathieu_eigenvalues(q_strength: f64, count: usize, basis_size: usize) -> Result<MathieuSpectrum> {
    if count == 0 || basis_size < 4 * count {
        return Err(Error::InvalidArgument(format!(
            "basis_size {basis_size} must be at least 4 * count ({count})"
        )));
    }
    if !q_strength.is_finite() || q_strength < 0.0 {
        return Err(Error::InvalidArgument(format!("q_strength {q_strength} must be >= 0")));
    }
    let levels = fourier_matrix(q_strength, basis_size).lowest(count);
    let doubled = fourier_matrix(q_strength, 2 * basis_size).lowest(count);
    for (level, (a, b)) in levels.iter().zip(&doubled).enumerate() {
        let change = (a - b).abs() / b.abs().max(1.0);
        if change > 1e-8 {
            return Err(Error::TruncationNotConverged {
                level,
                change,
                basis_size,
            });
        }
    }
    Ok(MathieuSpectrum {
        q_strength,
        levels,
        truncation: basis_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rotor_limit() {
        let s = mathieu_eigenvalues(0.0, 7, 28).unwrap();
        let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        for (a, b) in s.levels.iter().zip(expected) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn rejects_small_basis() {
        assert!(matches!(
            mathieu_eigenvalues(1.0, 10, 20),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unconverged_truncation_is_reported() {
        // A deep well localizes the ground state beyond 8 Fourier modes.
        let err = mathieu_eigenvalues(400.0, 2, 8).unwrap_err();
        assert!(matches!(err, Error::TruncationNotConverged { .. }), "{err:?}");
    }
}
