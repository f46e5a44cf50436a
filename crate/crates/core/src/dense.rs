//! Dense helpers for desk-scale certificates and oracle checks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Default upper bound on the order of matrices that are formed densely.
pub const DEFAULT_DENSE_CAP: usize = 2000;

pub fn check_dense_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        return Err(Error::DenseCapExceeded { order, cap });
    }
    Ok(())
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rank_tol · σ_max · max(rows, cols)`.
pub fn numerical_rank(m: &DenseMatrix, rank_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let threshold = rank_tol * smax * m.nrows().max(m.ncols()) as f64;
    s.iter().filter(|&&v| v > threshold).count()
}

/// Solves `a · X = rhs` by partial-pivot LU.
pub fn lu_solve(a: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    a.clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::Singular("LU solve hit a zero pivot"))
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.clone()
        .try_inverse()
        .ok_or(Error::Singular("matrix is not invertible"))
}
