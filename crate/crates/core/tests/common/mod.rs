//! Dense oracles shared by the integration tests. Everything here is built
//! from the assembled matrices with explicit inverses or products, so it
//! does not reuse the block-elimination paths under test.
#![allow(dead_code)]

use apss_core::dense::DenseMatrix;
use apss_core::problems::gen_random_singular;
use apss_core::SaddleSystem;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_vec(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn matvec(m: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Dense `(αI + 𝒜₁, αI − 𝒜₁, αI + 𝒜₂, αI − 𝒜₂)` from the assembled split.
pub fn dense_shifts(sys: &SaddleSystem, alpha: f64) -> [DenseMatrix; 4] {
    let (a1, a2) = sys.assemble_split();
    let (a1, a2) = (a1.to_dense(), a2.to_dense());
    let id = DenseMatrix::identity(sys.order(), sys.order()) * alpha;
    [&id + &a1, &id - &a1, &id + &a2, &id - &a2]
}

pub fn inv(m: &DenseMatrix) -> DenseMatrix {
    m.clone().try_inverse().expect("oracle matrix is invertible")
}

/// `T_α` by explicit inverses.
pub fn oracle_t(sys: &SaddleSystem, alpha: f64) -> DenseMatrix {
    let [p1, m1, p2, m2] = dense_shifts(sys, alpha);
    inv(&p2) * m1 * inv(&p1) * m2
}

/// `M_α = (αI + 𝒜₁)(αI + 𝒜₂)`.
pub fn oracle_m(sys: &SaddleSystem, alpha: f64) -> DenseMatrix {
    let [p1, _, p2, _] = dense_shifts(sys, alpha);
    p1 * p2
}

/// `f = 2α (αI + 𝒜₂)⁻¹ (αI + 𝒜₁)⁻¹ b`.
pub fn oracle_f(sys: &SaddleSystem, alpha: f64, b: &[f64]) -> Vec<f64> {
    let [p1, _, p2, _] = dense_shifts(sys, alpha);
    matvec(&(inv(&p2) * inv(&p1) * (2.0 * alpha)), b)
}

/// Random singular systems of varied shape, scaled.
pub fn random_systems(count: usize) -> Vec<(String, SaddleSystem)> {
    const SHAPES: [(usize, usize, usize, usize); 5] =
        [(8, 5, 4, 1), (10, 6, 5, 2), (12, 7, 5, 2), (14, 8, 6, 1), (16, 9, 7, 3)];
    (0..count)
        .map(|k| {
            let (n, m, l, d) = SHAPES[k % SHAPES.len()];
            let seed = 1000 + k as u64;
            let sys = gen_random_singular(n, m, l, d, seed).expect("feasible shape");
            (format!("random(n={n},m={m},l={l},def={d},seed={seed})"), sys.scale().0)
        })
        .collect()
}
