use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Matrix of an operator in the basis `|e_n>`, `n = offset .. offset + dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub offset: i64,
    pub entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(offset: i64, entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "operator matrices are square");
        Self { offset, entries }
    }

    pub fn identity(offset: i64, dim: usize) -> Self {
        Self::new(offset, DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(offset: i64, diag: &[f64]) -> Self {
        let n = diag.len();
        Self::new(
            offset,
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn levels(&self) -> std::ops::Range<i64> {
        self.offset..self.offset + self.dim() as i64
    }

    /// Entry `<e_n| A |e_m>` by level index.
    pub fn get(&self, n: i64, m: i64) -> Complex64 {
        self.entries[((n - self.offset) as usize, (m - self.offset) as usize)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.entries.diagonal().iter().copied().collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    /// `max |A - A^dagger|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// `exp(-i A t)` through the eigendecomposition of the Hermitian part.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let eig = self.hermitian_part().symmetric_eigen();
        let phases = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -eig.eigenvalues[i] * t)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }

    fn check_window(&self, other: &Self) -> Result<()> {
        if self.offset != other.offset || self.dim() != other.dim() {
            return Err(Error::WindowMismatch {
                left_offset: self.offset,
                left_dim: self.dim(),
                right_offset: other.offset,
                right_dim: other.dim(),
            });
        }
        Ok(())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        Ok(Self::new(self.offset, &self.entries * &other.entries))
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.check_window(b)?;
    Ok(OperatorMatrix::new(
        a.offset,
        &a.entries * &b.entries - &b.entries * &a.entries,
    ))
}

/// `max |U U^dagger - I|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let p = u * u.adjoint();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OperatorMatrix {
        let z = |re, im| Complex64::new(re, im);
        OperatorMatrix::new(
            -1,
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    z(1.0, 0.0),
                    z(0.0, 2.0),
                    z(0.0, 0.0),
                    z(0.0, -2.0),
                    z(3.0, 0.0),
                    z(1.0, 1.0),
                    z(0.0, 0.0),
                    z(1.0, -1.0),
                    z(-2.0, 0.0),
                ],
            ),
        )
    }

    #[test]
    fn hermitian_spectrum_and_unitary() {
        let a = sample();
        assert_eq!(a.hermitian_defect(), 0.0);
        let ev = a.eigenvalues();
        let trace: f64 = ev.iter().sum();
        assert!((trace - 2.0).abs() < 1e-12);
        assert!(unitarity_defect(&a.unitary(0.7)) < 1e-13);
        assert_eq!(a.get(-1, 0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn commutator_with_itself_vanishes() {
        let a = sample();
        let c = commutator(&a, &a).unwrap();
        assert!(c.entries.iter().all(|z| z.norm() < 1e-14));
        let b = OperatorMatrix::identity(0, 3);
        assert!(matches!(commutator(&a, &b), Err(Error::WindowMismatch { .. })));
    }
}
