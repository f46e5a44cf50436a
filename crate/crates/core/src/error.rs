use std::path::PathBuf;

use crate::krylov::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent saddle system: {0}")]
    InvalidSystem(String),

    #[error("right-hand side has zero norm")]
    ZeroRhs,

    /// CG met a direction with non-positive curvature; `iterate` is the last
    /// iterate before the breakdown.
    #[error("CG breakdown at iteration {iteration}: p'Ap = {curvature:e} (operator is not SPD)")]
    CgBreakdown {
        iteration: usize,
        curvature: f64,
        iterate: Vec<f64>,
    },

    #[error("stationary iteration diverged after {} iterations", report.iterations)]
    Diverged { report: SolveReport },

    #[error("dense factorization failed: {0}")]
    Singular(&'static str),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("order {order} exceeds the dense cap {cap}")]
    DenseCapExceeded { order: usize, cap: usize },

    #[error("MatrixMarket {path}: {msg}")]
    MatrixMarket { path: PathBuf, msg: String },

    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
