use nalgebra::{DMatrix, DVector};

use super::YSequence;
use crate::error::{Error, Result};
use crate::numeric::quadrature::LogGrid;

/// Largest accepted moment residual `max_n |int p_n w - 1|`.
pub const MOMENT_RESIDUAL_LIMIT: f64 = 1e-6;

/// Strength of the pull of `w` towards 1 relative to the moment rows.
const REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// `int p_n w d jt - 1` for each constrained level.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&rhs).unwrap_or_else(|| {
        // Rank-deficient passive set: fall back to the pseudo-inverse.
        a.clone().svd(true, true).solve(b, 1e-15).expect("svd with u and v")
    })
}

/// Lawson-Hanson non-negative least squares: `min |A x - b|`, `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    // Interior solution of the unconstrained problem satisfies the KKT
    // conditions directly.
    let free = least_squares(a, b);
    if free.iter().all(|v| *v > 0.0) {
        return free;
    }

    let tol = 1e-12 * a.norm() * b.norm().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    for _ in 0..3 * n {
        let grad = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(t) = candidate.filter(|&j| grad[j] > tol) else {
            break;
        };
        passive[t] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&cols);
            let s_p = least_squares(&sub, b);
            if s_p.iter().all(|v| *v > 0.0) {
                x.fill(0.0);
                for (k, &j) in cols.iter().enumerate() {
                    x[j] = s_p[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in cols.iter().enumerate() {
                if s_p[k] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - s_p[k]));
                }
            }
            for (k, &j) in cols.iter().enumerate() {
                x[j] += alpha * (s_p[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// Solves `int p_n(J) w(J) d jt = 1` for `n < levels` with `w >= 0`
/// tabulated on `grid`.
///
/// The moment system is underdetermined, so it is augmented with a weak
/// Tikhonov term pulling `w` towards 1; when `w == 1` already solves the
/// moment problem (the gamma case `y_n = n`), it is recovered exactly.
pub fn solve_weight(y: &YSequence, levels: usize, grid: &LogGrid) -> Result<WeightSolution> {
    if levels == 0 || grid.is_empty() {
        return Err(Error::InvalidArgument("need at least one level and one node".into()));
    }
    if levels > y.len() {
        return Err(Error::InvalidSequence(format!(
            "{levels} levels requested from a sequence of length {}",
            y.len()
        )));
    }
    let ln_series = grid.nodes.iter().map(|&x| y.ln_series(x)).collect::<Result<Vec<_>>>()?;
    let a = DMatrix::from_fn(levels, grid.len(), |n, i| {
        let x = grid.nodes[i];
        let lp = n as f64 * x.ln() - y.ln_factorial(n) - ln_series[i];
        grid.weights[i] * lp.exp()
    });

    // Uniform penalty REGULARIZATION * |A| (v_i - 1): nodes the moments do
    // not see stay at 1.
    let k = grid.len();
    let lambda = REGULARIZATION * a.norm() / (k as f64).sqrt();
    let mut stacked = DMatrix::zeros(levels + k, k);
    stacked.view_mut((0, 0), (levels, k)).copy_from(&a);
    let mut rhs = DVector::from_element(levels + k, lambda);
    rhs.rows_mut(0, levels).fill(1.0);
    for i in 0..k {
        stacked[(levels + i, i)] = lambda;
    }

    let values: Vec<f64> = nnls(&stacked, &rhs).iter().copied().collect();
    let ones = DVector::from_element(levels, 1.0);
    let w = DVector::from_column_slice(&values);
    let residuals: Vec<f64> = (&a * w - ones).iter().copied().collect();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !(max_residual <= MOMENT_RESIDUAL_LIMIT) {
        return Err(Error::MomentResidualTooLarge {
            residual: max_residual,
            limit: MOMENT_RESIDUAL_LIMIT,
        });
    }
    Ok(WeightSolution {
        nodes: grid.nodes.clone(),
        values,
        residuals,
        max_residual,
    })
}
