//! Eigenvalues of real symmetric tridiagonal matrices by Sturm-sequence
//! bisection.
//!
//! Both the Mathieu Hamiltonian in the Fourier basis and the Jacobi
//! matrices of the Gauss rules are symmetric tridiagonal, so this one
//! routine backs the pendulum spectrum and every quadrature node set.

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal and `off[i]`
/// coupling rows `i` and `i + 1`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off_sq: Vec<f64>,
    lower: f64,
    upper: f64,
}

/// Maps doubles to integers preserving order, so bisection over the keys
/// reaches adjacent doubles in at most 64 steps.
fn ordered_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits >= 0 {
        bits
    } else {
        -(bits & i64::MAX)
    }
}

fn from_ordered_key(k: i64) -> f64 {
    if k >= 0 {
        f64::from_bits(k as u64)
    } else {
        f64::from_bits((-k) as u64 | (1u64 << 63))
    }
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
        let n = diag.len();
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
            lower = lower.min(diag[i] - left - right);
            upper = upper.max(diag[i] + left + right);
        }
        let pad = 1e-12 * (lower.abs().max(upper.abs()).max(1.0));
        Self {
            off_sq: off.iter().map(|e| e * e).collect(),
            diag,
            lower: lower - pad,
            upper: upper + pad,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let prev = if q == 0.0 {
                f64::EPSILON * (self.off_sq[i - 1].sqrt() + 1e-300)
            } else {
                q
            };
            q = self.diag[i] - x - self.off_sq[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based): the largest double `x`
    /// with at most `k` eigenvalues strictly below it, so eigenvalues that
    /// are representable come out exactly.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let mut lo = ordered_key(self.lower) as i128;
        let mut hi = ordered_key(self.upper) as i128;
        while hi - lo > 1 {
            let mid = (lo + hi).div_euclid(2);
            if self.count_below(from_ordered_key(mid as i64)) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        from_ordered_key(lo as i64)
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.dim())).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lowest(self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let t = SymTridiagonal::new(vec![3.0, -1.0, 2.0], vec![0.0, 0.0]);
        let ev = t.eigenvalues();
        assert_eq!(ev, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_eigenvalue_is_exact() {
        let t = SymTridiagonal::new(vec![0.0, 1.0], vec![0.0]);
        assert_eq!(t.eigenvalues(), vec![0.0, 1.0]);
    }

    #[test]
    fn ordered_keys_are_monotone() {
        let xs = [-1e300, -1.0, -1e-300, -0.0, 0.0, 1e-300, 1.0, 1e300];
        for w in xs.windows(2) {
            assert!(ordered_key(w[0]) <= ordered_key(w[1]));
        }
        for x in xs {
            assert_eq!(from_ordered_key(ordered_key(x)), x);
        }
    }

    #[test]
    fn discrete_laplacian_closed_form() {
        // 2 on the diagonal, -1 off it: 2 - 2 cos(k pi / (n + 1)).
        let n = 40;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        for (k, ev) in t.eigenvalues().into_iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((ev - exact).abs() < 1e-13, "k={k}: {ev} vs {exact}");
        }
    }

    #[test]
    fn repeated_eigenvalues_are_counted() {
        let t = SymTridiagonal::new(vec![1.0, 1.0, 4.0, 4.0], vec![0.0, 0.0, 0.0]);
        assert_eq!(t.count_below(1.5), 2);
        let ev = t.eigenvalues();
        assert!((ev[1] - 1.0).abs() < 1e-14 && (ev[3] - 4.0).abs() < 1e-14);
    }
}
