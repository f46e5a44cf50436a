//! Desk-scale spectral certificates for the stationary APSS iteration.
//!
//! The iteration `x ↦ T_α x + f` on a consistent singular system converges
//! for every start vector exactly when `index(I − T_α) = 1` and the
//! pseudo-spectral radius `ϑ(T_α) = max{|λ| : λ ∈ σ(T_α), λ ≠ 1}` is below one.
//! Everything here is formed densely with exact (LU) shifted solves so that
//! the certificates are not polluted by inner-solve error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::dense::{check_dense_cap, lu_solve, numerical_rank, DenseMatrix, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::norm::{operator_two_norm, DEFAULT_NORM_MAXIT, DEFAULT_NORM_TOL};
use crate::saddle::SaddleSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Eigenvalues with `|λ − 1| ≤ unit_tol` count as the unit eigenvalue.
    pub unit_tol: f64,
    /// Relative singular-value threshold for numerical rank.
    pub rank_tol: f64,
    pub dense_cap: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            unit_tol: 1e-6,
            rank_tol: 1e-12,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCertificate {
    pub alpha: f64,
    pub eigenvalues: Vec<Complex64>,
    pub unit_eigen_count: usize,
    pub pseudo_spectral_radius: f64,
    pub index_one: bool,
    pub kellogg_a1: f64,
    pub kellogg_a2: f64,
    pub unit_tol: f64,
}

impl SpectralCertificate {
    /// Both semi-convergence conditions hold.
    pub fn semi_convergent(&self) -> bool {
        self.index_one && self.pseudo_spectral_radius < 1.0
    }
}

/// Which half of the splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    A1,
    A2,
}

/// Dense `(αI + 𝒜ᵢ, αI − 𝒜ᵢ)` pairs for both halves.
struct ShiftedPairs {
    plus1: DenseMatrix,
    minus1: DenseMatrix,
    plus2: DenseMatrix,
    minus2: DenseMatrix,
}

fn shifted_pairs(sys: &SaddleSystem, alpha: f64, cap: usize) -> Result<ShiftedPairs> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let order = sys.order();
    check_dense_cap(order, cap)?;
    let (a1, a2) = sys.assemble_split();
    let (a1, a2) = (a1.to_dense(), a2.to_dense());
    let shift = DenseMatrix::identity(order, order) * alpha;
    Ok(ShiftedPairs {
        plus1: &shift + &a1,
        minus1: &shift - &a1,
        plus2: &shift + &a2,
        minus2: &shift - &a2,
    })
}

/// `T_α = (αI + 𝒜₂)⁻¹ (αI − 𝒜₁) (αI + 𝒜₁)⁻¹ (αI − 𝒜₂)`.
pub fn build_iteration_matrix(sys: &SaddleSystem, alpha: f64, cap: usize) -> Result<DenseMatrix> {
    let s = shifted_pairs(sys, alpha, cap)?;
    let inner = lu_solve(&s.plus1, &s.minus2)?;
    lu_solve(&s.plus2, &(&s.minus1 * inner))
}

/// `L_α = (αI + 𝒜₁)⁻¹ (αI − 𝒜₁) (αI + 𝒜₂)⁻¹ (αI − 𝒜₂)`, similar to `T_α`.
pub fn build_similar_matrix(sys: &SaddleSystem, alpha: f64, cap: usize) -> Result<DenseMatrix> {
    let s = shifted_pairs(sys, alpha, cap)?;
    let right = lu_solve(&s.plus2, &s.minus2)?;
    lu_solve(&s.plus1, &(&s.minus1 * right))
}

/// `(αI + 𝒜ᵢ)⁻¹ (αI − 𝒜ᵢ)`.
pub fn cayley_factor(sys: &SaddleSystem, which: SplitPart, alpha: f64, cap: usize) -> Result<DenseMatrix> {
    let s = shifted_pairs(sys, alpha, cap)?;
    match which {
        SplitPart::A1 => lu_solve(&s.plus1, &s.minus1),
        SplitPart::A2 => lu_solve(&s.plus2, &s.minus2),
    }
}

/// All eigenvalues of a real square matrix via the real Schur form.
pub fn spectrum(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "spectrum needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let max_iter = 200 * m.nrows() + 1000;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, max_iter).ok_or(Error::EigenNoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `(max |λ| over λ with |λ − 1| > unit_tol, number of unit eigenvalues)`;
/// the maximum over an empty set is 0.
pub fn pseudo_spectral_radius(eigs: &[Complex64], unit_tol: f64) -> (f64, usize) {
    let one = Complex64::new(1.0, 0.0);
    eigs.iter().fold((0.0, 0), |(radius, units), &l| {
        if (l - one).norm() <= unit_tol {
            (radius, units + 1)
        } else {
            (f64::max(radius, l.norm()), units)
        }
    })
}

/// `index(I − T) = 1`, tested as `rank(I − T) = rank((I − T)²)`.
pub fn index_is_one(t: &DenseMatrix, rank_tol: f64) -> bool {
    let d = DenseMatrix::identity(t.nrows(), t.ncols()) - t;
    numerical_rank(&d, rank_tol) == numerical_rank(&(&d * &d), rank_tol)
}

/// `‖(αI + 𝒜ᵢ)⁻¹ (αI − 𝒜ᵢ)‖₂` by power iteration.
pub fn kellogg_norm(sys: &SaddleSystem, which: SplitPart, alpha: f64) -> Result<f64> {
    let g = cayley_factor(sys, which, alpha, DEFAULT_DENSE_CAP)?;
    let gt = g.transpose();
    let est = operator_two_norm(
        |x| (&g * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec(),
        |y| (&gt * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec(),
        g.nrows(),
        DEFAULT_NORM_TOL,
        DEFAULT_NORM_MAXIT,
    );
    Ok(est.value)
}

/// `M_α⁻¹ 𝒜` with `M_α = (αI + 𝒜₁)(αI + 𝒜₂)`, formed densely.
pub fn preconditioned_matrix(sys: &SaddleSystem, alpha: f64, cap: usize) -> Result<DenseMatrix> {
    let s = shifted_pairs(sys, alpha, cap)?;
    let full = sys.assemble_full().to_dense();
    lu_solve(&s.plus2, &lu_solve(&s.plus1, &full)?)
}

pub fn preconditioned_spectrum(sys: &SaddleSystem, alpha: f64, cap: usize) -> Result<Vec<Complex64>> {
    spectrum(&preconditioned_matrix(sys, alpha, cap)?)
}

/// Full certificate for one shift.
pub fn certify(sys: &SaddleSystem, alpha: f64, opts: &AnalysisOptions) -> Result<SpectralCertificate> {
    let t = build_iteration_matrix(sys, alpha, opts.dense_cap)?;
    let eigenvalues = spectrum(&t)?;
    let (pseudo_spectral_radius, unit_eigen_count) = pseudo_spectral_radius(&eigenvalues, opts.unit_tol);
    Ok(SpectralCertificate {
        alpha,
        unit_eigen_count,
        pseudo_spectral_radius,
        index_one: index_is_one(&t, opts.rank_tol),
        kellogg_a1: kellogg_norm(sys, SplitPart::A1, alpha)?,
        kellogg_a2: kellogg_norm(sys, SplitPart::A2, alpha)?,
        unit_tol: opts.unit_tol,
        eigenvalues,
    })
}

/// `(dim(null(Bᵀ) ∩ null(C)), dim(null(Cᵀ)))`. A singular saddle operator
/// has at least one of them positive.
pub fn null_space_dims(sys: &SaddleSystem, rank_tol: f64) -> (usize, usize) {
    let (n, m, l) = (sys.n(), sys.m(), sys.l());
    let mut stacked = DenseMatrix::zeros(n + l, m);
    stacked.view_mut((0, 0), (n, m)).copy_from(&sys.b().to_dense().transpose());
    stacked.view_mut((n, 0), (l, m)).copy_from(&sys.c().to_dense());
    let ct = sys.c().to_dense().transpose();
    (m - numerical_rank(&stacked, rank_tol), l - numerical_rank(&ct, rank_tol))
}

/// Whether two eigenvalue lists agree as multisets: after sorting by
/// `(re, im)` every entry of `a` is paired with a distinct entry of `b` no
/// further than `radius` away.
pub fn multisets_match(a: &[Complex64], b: &[Complex64], radius: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let sorted = |v: &[Complex64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let nearest = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match nearest {
            Some((k, d)) if d <= radius => {
                used[k] = true;
                true
            }
            _ => false,
        }
    })
}

/// `re,im` CSV, one eigenvalue per row, 17 significant digits.
pub fn format_eigenvalues_csv(eigs: &[Complex64]) -> String {
    let mut s = String::from("re,im\n");
    for l in eigs {
        let _ = writeln!(s, "{:.16e},{:.16e}", l.re, l.im);
    }
    s
}

pub fn write_eigenvalues_csv(path: impl AsRef<Path>, eigs: &[Complex64]) -> Result<()> {
    fs::write(path, format_eigenvalues_csv(eigs))?;
    Ok(())
}
