//! Small dense linear algebra helpers shared by the model, estimation and
//! portfolio code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::normal::LN_2PI;

/// Tolerance on |a_ij - a_ji| accepted for a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub type Chol = Cholesky<f64, Dyn>;

pub fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Cholesky factorisation of a symmetric positive definite matrix, or `None`
/// when the matrix is asymmetric, non-finite or not positive definite.
pub fn spd_cholesky(a: &DMatrix<f64>) -> Option<Chol> {
    if !is_symmetric(a, SYMMETRY_TOL) || a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let chol = Cholesky::new(symmetrize(a))?;
    if chol.l_dirty().diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) {
        Some(chol)
    } else {
        None
    }
}

/// (A + Aᵀ)/2
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Log density of N(0, Σ) at `e`, given the Cholesky factor of Σ.
pub fn mvn_log_density(e: &DVector<f64>, chol: &Chol) -> f64 {
    let l = chol.l_dirty();
    let m = e.len();
    let mut z = e.clone();
    // forward substitution against the lower factor
    for i in 0..m {
        let mut s = z[i];
        for j in 0..i {
            s -= l[(i, j)] * z[j];
        }
        z[i] = s / l[(i, i)];
    }
    let log_det: f64 = (0..m).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    -0.5 * (m as f64 * LN_2PI + log_det + z.norm_squared())
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetrize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

/// Builds a matrix from row-major nested vectors. Returns `None` on ragged input.
pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
