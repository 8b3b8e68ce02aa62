use crate::error::{Error, Result};
use crate::exec::Execution;

use super::Matrix;

/// Lower-triangular factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "cholesky needs a square matrix, got {}x{}",
                n,
                a.cols()
            )));
        }
        let max_diag = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let tol = max_diag * n as f64 * f64::EPSILON;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if d.is_nan() || d <= tol {
                return Err(Error::SingularSystem {
                    column: j,
                    pivot: d,
                });
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(Cholesky { lower: l })
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lower.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {n}",
                b.rows()
            )));
        }
        let l = &self.lower;
        let mut x = b.clone();
        for c in 0..b.cols() {
            // L y = b
            for i in 0..n {
                let mut s = x.get(i, c);
                for k in 0..i {
                    s -= l.get(i, k) * x.get(k, c);
                }
                x.set(i, c, s / l.get(i, i));
            }
            // Lᵀ x = y
            for i in (0..n).rev() {
                let mut s = x.get(i, c);
                for k in i + 1..n {
                    s -= l.get(k, i) * x.get(k, c);
                }
                x.set(i, c, s / l.get(i, i));
            }
        }
        Ok(x)
    }
}

/// Ridge-regularized least squares `W = (AᵀA + λI)⁻¹ AᵀY`.
///
/// With `lambda = 0` and full column rank this is the Moore-Penrose
/// least-squares solution. One step of iterative refinement is applied to
/// the normal equations.
pub fn ridge_pseudoinverse_solve(a: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    if a.rows() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows but targets have {}",
            a.rows(),
            y.rows()
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ridge lambda must be finite and non-negative, got {lambda}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput("design matrix"));
    }
    if !y.is_finite() {
        return Err(Error::NonFiniteInput("targets"));
    }
    let exec = Execution::default();
    let mut gram = a.t_matmul_with(a, exec)?;
    gram.add_diagonal(lambda);
    let rhs = a.t_matmul_with(y, exec)?;
    let chol = Cholesky::factor(&gram)?;
    let w = chol.solve(&rhs)?;
    let residual = rhs.sub(&gram.matmul_with(&w, exec)?)?;
    let w = w.add(&chol.solve(&residual)?)?;
    if !w.is_finite() {
        return Err(Error::NonFiniteInput("solution"));
    }
    Ok(w)
}
