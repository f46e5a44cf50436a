use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{numerical_rank, DenseMatrix};
use crate::error::{Error, Result};
use crate::saddle::SaddleSystem;
use crate::sparse::SparseMatrix;

/// How the two extra rows below `C₁` are stacked in the Kronecker example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CStacking {
    /// `(C₁; c₁; c₂)`.
    #[default]
    Distinct,
    /// `(C₁; c₂; c₂)`, the stacking as printed.
    DuplicateSecond,
}

/// Kronecker-structured singular test system of order `4p² + 2`.
///
/// ```text
/// A  = blockdiag(I⊗T + T⊗I, I⊗T + T⊗I)     T = tridiag(-1, 2, -1) / h²
/// B  = (I⊗F, F⊗I)                          F = tridiag(0, 1, -1) / h
/// C₁ = E⊗F                                 E = diag(1, p+1, 2p+1, …, p²-p+1)
/// c₁ = (eᵀ, 0ᵀ) C₁,  c₂ = (0ᵀ, eᵀ) C₁      h = 1/(p+1), e ∈ R^{p²/2}
/// ```
///
/// `C` has `p² + 2` rows and rank `p²`.
pub fn gen_kron_example(p: usize, stacking: CStacking) -> Result<SaddleSystem> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "the Kronecker example needs an even p >= 2, got {p}"
        )));
    }
    let h = 1.0 / (p as f64 + 1.0);
    let t = SparseMatrix::tridiag(p, -1.0, 2.0, -1.0, 1.0 / (h * h))?;
    let f = SparseMatrix::tridiag(p, 0.0, 1.0, -1.0, 1.0 / h)?;
    let eye = SparseMatrix::identity(p);

    let lap = SparseMatrix::kron(&eye, &t).add(&SparseMatrix::kron(&t, &eye))?;
    let p2 = p * p;
    let a = SparseMatrix::from_blocks(&[p2, p2], &[p2, p2], &[(0, 0, 1.0, &lap), (1, 1, 1.0, &lap)])?;
    let b = SparseMatrix::from_blocks(
        &[p2],
        &[p2, p2],
        &[(0, 0, 1.0, &SparseMatrix::kron(&eye, &f)), (0, 1, 1.0, &SparseMatrix::kron(&f, &eye))],
    )?;

    let e_diag: Vec<f64> = (0..p).map(|k| (k * p + 1) as f64).collect();
    let c1 = SparseMatrix::kron(&SparseMatrix::diagonal(&e_diag), &f);
    let half = p2 / 2;
    let first: Vec<f64> = (0..p2).map(|i| if i < half { 1.0 } else { 0.0 }).collect();
    let second: Vec<f64> = first.iter().map(|v| 1.0 - v).collect();
    let row1 = c1.spmv_transpose(&first)?;
    let row2 = c1.spmv_transpose(&second)?;
    let extra = match stacking {
        CStacking::Distinct => [row1, row2.clone()],
        CStacking::DuplicateSecond => [row2.clone(), row2],
    };
    let entries = c1.triplets().chain(
        extra
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(j, &v)| (p2 + k, j, v))),
    );
    let c = SparseMatrix::from_triplets(p2 + 2, p2, entries)?;
    SaddleSystem::new(a, b, c)
}

/// Random singular system with `A = MᵀM + I`, a random full-row-rank `B`,
/// and `C` of rank `l − deficiency`.
///
/// Entries are drawn uniformly from `[-1, 1)` by a ChaCha8 stream seeded with
/// `seed` (`rand_chacha::ChaCha8Rng::seed_from_u64`), in the order `M`, `B`,
/// independent rows of `C`, combination coefficients, all row-major.
pub fn gen_random_singular(n: usize, m: usize, l: usize, deficiency: usize, seed: u64) -> Result<SaddleSystem> {
    if deficiency == 0 || l < deficiency || m + deficiency < l || m > n || n == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "infeasible random system n={n} m={m} l={l} deficiency={deficiency} \
             (need 1 <= deficiency <= l, l - deficiency <= m <= n)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |rows: usize, cols: usize| -> DenseMatrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::from_row_slice(rows, cols, &data)
    };

    let mm = uniform(n, n);
    let a = mm.transpose() * &mm + DenseMatrix::identity(n, n);
    // symmetrize exactly so the stored matrix passes the symmetry check bit for bit
    let a = (&a + a.transpose()) * 0.5;
    let b = uniform(m, n);
    if numerical_rank(&b, 1e-12) != m {
        return Err(Error::InvalidSystem(format!("seed {seed} produced a rank-deficient B")));
    }
    let rank = l - deficiency;
    let base = uniform(rank, m);
    let coeffs = uniform(deficiency, rank);
    let combos = &coeffs * &base;
    let mut c = DenseMatrix::zeros(l, m);
    c.view_mut((0, 0), (rank, m)).copy_from(&base);
    c.view_mut((rank, 0), (deficiency, m)).copy_from(&combos);
    if rank > 0 && numerical_rank(&base, 1e-12) != rank {
        return Err(Error::InvalidSystem(format!("seed {seed} produced dependent rows in C")));
    }
    SaddleSystem::new(
        SparseMatrix::from_dense(&a),
        SparseMatrix::from_dense(&b),
        SparseMatrix::from_dense(&c),
    )
}
