//! Solvers and spectral certificates for singular block three-by-three
//! saddle point systems built on the alternating positive semi-definite
//! splitting (APSS).
//!
//! * [`sparse`]: CSR kernels.
//! * [`saddle`]: operator assembly, splitting, scaling, right-hand sides.
//! * [`problems`]: generators and MatrixMarket/manifest I/O.
//! * [`krylov`]: CG and flexible GMRES.
//! * [`apss`]: shifted block solves, preconditioner, stationary iteration, `α_est`.
//! * [`analysis`]: dense iteration matrix, spectra, semi-convergence certificates.
//! * [`experiment`]: the scale / all-ones / zero-start solve protocol.

pub mod analysis;
pub mod apss;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod krylov;
pub mod norm;
pub mod problems;
pub mod saddle;
pub mod sparse;
pub mod vector;

pub use error::{Error, Result};
pub use saddle::{BlockVector, SaddleSystem, ScalingRecord};
pub use sparse::SparseMatrix;
