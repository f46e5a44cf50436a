//! Test-problem generators and file import/export.

mod generators;
pub mod manifest;
pub mod matrix_market;

pub use generators::{gen_kron_example, gen_random_singular, CStacking};
pub use manifest::{load_system, save_system, Manifest};
pub use matrix_market::{load_matrix_market, save_matrix_market};
