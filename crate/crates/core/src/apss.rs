//! Alternating positive semi-definite splitting.
//!
//! With `𝒜 = 𝒜₁ + 𝒜₂` and a shift `α > 0`, one sweep of the stationary method is
//!
//! ```text
//! (αI + 𝒜₁) x_{k+½} = (αI − 𝒜₂) x_k     + b
//! (αI + 𝒜₂) x_{k+1} = (αI − 𝒜₁) x_{k+½} + b
//! ```
//!
//! and the induced preconditioner is `M_α = (αI + 𝒜₁)(αI + 𝒜₂)`. Both shifted
//! systems reduce by block elimination to one SPD solve each:
//! `αI + A + BᵀB/α` (order `n`) and `α²I + CCᵀ` (order `l`).

use std::time::Instant;

use nalgebra::{DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::krylov::{cg, SolveReport};
use crate::saddle::{BlockVector, SaddleSystem};
use crate::vector::{axpy, norm};

/// Residual growth over the best residual seen that aborts [`ApssOperator::iterate`].
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// How the two SPD sub-systems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerMode {
    /// Unpreconditioned CG from a zero start.
    #[default]
    Cg,
    /// Dense LU factorizations computed once at construction.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApssOptions {
    /// Relative residual reduction for inner CG.
    pub inner_reduction: f64,
    pub inner_maxit: usize,
    pub inner_mode: InnerMode,
}

impl Default for ApssOptions {
    fn default() -> Self {
        Self {
            inner_reduction: 1e-3,
            inner_maxit: 200,
            inner_mode: InnerMode::Cg,
        }
    }
}

/// Inner-solve statistics for one shifted solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InnerInfo {
    pub iterations: usize,
    pub converged: bool,
}

struct ExactFactors {
    velocity: LU<f64, Dyn, Dyn>,
    constraint: LU<f64, Dyn, Dyn>,
}

/// A shift `α` bound to a saddle system.
pub struct ApssOperator {
    system: SaddleSystem,
    alpha: f64,
    opts: ApssOptions,
    exact: Option<ExactFactors>,
}

impl std::fmt::Debug for ApssOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApssOperator")
            .field("order", &self.system.order())
            .field("alpha", &self.alpha)
            .field("opts", &self.opts)
            .finish()
    }
}

impl ApssOperator {
    pub fn new(system: SaddleSystem, alpha: f64, opts: ApssOptions) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(opts.inner_reduction > 0.0 && opts.inner_reduction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "inner reduction {} not in (0, 1)",
                opts.inner_reduction
            )));
        }
        let exact = match opts.inner_mode {
            InnerMode::Cg => None,
            InnerMode::Exact => Some(factorize(&system, alpha)?),
        };
        Ok(Self {
            system,
            alpha,
            opts,
            exact,
        })
    }

    pub fn system(&self) -> &SaddleSystem {
        &self.system
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn options(&self) -> &ApssOptions {
        &self.opts
    }

    /// Solves `(αI + 𝒜₁) w = r`.
    pub fn solve_shift_a1(&self, r: &BlockVector) -> Result<(BlockVector, InnerInfo)> {
        self.check_block(r)?;
        let (sys, alpha) = (&self.system, self.alpha);
        let mut rhs = sys.b().spmv_transpose(&r.y)?;
        rhs.iter_mut().zip(&r.x).for_each(|(v, rx)| *v = rx - *v / alpha);

        let (wx, info) = match &self.exact {
            Some(f) => (lu_apply(&f.velocity, &rhs)?, InnerInfo::default()),
            None => {
                let mut tmp = vec![0.0; sys.m()];
                let op = |v: &[f64], out: &mut [f64]| {
                    sys.a().mul_vec_into(v, out);
                    sys.b().mul_vec_into(v, &mut tmp);
                    let mut btb = vec![0.0; v.len()];
                    sys.b().mul_transpose_vec_into(&tmp, &mut btb);
                    for i in 0..v.len() {
                        out[i] += alpha * v[i] + btb[i] / alpha;
                    }
                };
                self.inner_cg(op, &rhs)?
            }
        };
        let mut wy = sys.b().spmv(&wx)?;
        wy.iter_mut().zip(&r.y).for_each(|(v, ry)| *v = (ry + *v) / alpha);
        let wz = r.z.iter().map(|v| v / alpha).collect();
        Ok((BlockVector { x: wx, y: wy, z: wz }, info))
    }

    /// Solves `(αI + 𝒜₂) w = r`.
    pub fn solve_shift_a2(&self, r: &BlockVector) -> Result<(BlockVector, InnerInfo)> {
        self.check_block(r)?;
        let (sys, alpha) = (&self.system, self.alpha);
        let mut rhs = sys.c().spmv(&r.y)?;
        rhs.iter_mut().zip(&r.z).for_each(|(v, rz)| *v = alpha * rz - *v);

        let (wz, info) = match &self.exact {
            Some(f) => (lu_apply(&f.constraint, &rhs)?, InnerInfo::default()),
            None => {
                let mut tmp = vec![0.0; sys.m()];
                let op = |v: &[f64], out: &mut [f64]| {
                    sys.c().mul_transpose_vec_into(v, &mut tmp);
                    sys.c().mul_vec_into(&tmp, out);
                    axpy(alpha * alpha, v, out);
                };
                self.inner_cg(op, &rhs)?
            }
        };
        let mut wy = sys.c().spmv_transpose(&wz)?;
        wy.iter_mut().zip(&r.y).for_each(|(v, ry)| *v = (ry + *v) / alpha);
        let wx = r.x.iter().map(|v| v / alpha).collect();
        Ok((BlockVector { x: wx, y: wy, z: wz }, info))
    }

    fn inner_cg<F>(&self, op: F, rhs: &[f64]) -> Result<(Vec<f64>, InnerInfo)>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let zero = vec![0.0; rhs.len()];
        let (w, rep) = cg(op, rhs, &zero, self.opts.inner_reduction, self.opts.inner_maxit)?;
        Ok((
            w,
            InnerInfo {
                iterations: rep.iterations,
                converged: rep.converged,
            },
        ))
    }

    fn check_block(&self, r: &BlockVector) -> Result<()> {
        if !r.matches(&self.system) {
            return Err(Error::DimensionMismatch {
                context: "block vector",
                expected: self.system.order(),
                actual: r.x.len() + r.y.len() + r.z.len(),
            });
        }
        Ok(())
    }

    /// `z = M_α⁻¹ r = (αI + 𝒜₂)⁻¹ (αI + 𝒜₁)⁻¹ r`.
    pub fn apply_preconditioner(&self, r: &[f64]) -> Result<Vec<f64>> {
        let r = BlockVector::from_flat(&self.system, r)?;
        let (half, _) = self.solve_shift_a1(&r)?;
        let (z, _) = self.solve_shift_a2(&half)?;
        Ok(z.to_flat())
    }

    /// `𝒜₁ v`, matrix-free.
    pub fn apply_a1(&self, v: &[f64]) -> Result<Vec<f64>> {
        let sys = &self.system;
        let v = BlockVector::from_flat(sys, v)?;
        let mut x = sys.a().spmv(&v.x)?;
        let bty = sys.b().spmv_transpose(&v.y)?;
        x.iter_mut().zip(&bty).for_each(|(a, b)| *a += b);
        let y = sys.b().spmv(&v.x)?.into_iter().map(|t| -t).collect();
        Ok(BlockVector {
            x,
            y,
            z: vec![0.0; sys.l()],
        }
        .to_flat())
    }

    /// `𝒜₂ v`, matrix-free.
    pub fn apply_a2(&self, v: &[f64]) -> Result<Vec<f64>> {
        let sys = &self.system;
        let v = BlockVector::from_flat(sys, v)?;
        let y = sys.c().spmv_transpose(&v.z)?.into_iter().map(|t| -t).collect();
        let z = sys.c().spmv(&v.y)?;
        Ok(BlockVector {
            x: vec![0.0; sys.n()],
            y,
            z,
        }
        .to_flat())
    }

    /// `M_α v = (αI + 𝒜₁)(αI + 𝒜₂) v`.
    pub fn apply_m(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut u = self.apply_a2(v)?;
        axpy(self.alpha, v, &mut u);
        let mut out = self.apply_a1(&u)?;
        axpy(self.alpha, &u, &mut out);
        Ok(out)
    }

    /// Runs the stationary iteration `x ↦ T_α x + f` until the relative
    /// residual of the full system drops to `tol` or `maxit` sweeps have been
    /// done.
    ///
    /// Each sweep is applied in the equivalent correction form
    /// `x ← x + 2α M_α⁻¹ (b − 𝒜x)`, so inexact inner solves perturb the update
    /// in proportion to the current residual and do not put a floor under it.
    pub fn iterate(&self, b: &[f64], x0: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        self.system.check_len(b.len(), "apss rhs")?;
        let start = Instant::now();
        let mut x = x0.to_vec();
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let mut r = self.residual(&x, b)?;
        let mut res = norm(&r) / b_norm;
        let mut history = vec![res];
        let mut best = res;
        let report = |it: usize, history: Vec<f64>, converged: bool, res: f64| SolveReport {
            iterations: it,
            residual_history: history,
            converged,
            wall_seconds: start.elapsed().as_secs_f64(),
            final_residual: res,
        };
        if res <= tol {
            return Ok((x, report(0, history, true, res)));
        }

        for it in 1..=maxit {
            let z = self.apply_preconditioner(&r)?;
            axpy(2.0 * self.alpha, &z, &mut x);
            r = self.residual(&x, b)?;
            res = norm(&r) / b_norm;
            history.push(res);
            if res <= tol {
                return Ok((x, report(it, history, true, res)));
            }
            best = best.min(res);
            if !res.is_finite() || res > DIVERGENCE_FACTOR * best {
                return Err(Error::Diverged {
                    report: report(it, history, false, res),
                });
            }
        }
        Ok((x, report(maxit, history, false, res)))
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.system.apply(x)?;
        r.iter_mut().zip(b).for_each(|(v, bi)| *v = bi - *v);
        Ok(r)
    }

    /// One full sweep `x ↦ T_α x + f`, computed through the two half-steps.
    pub fn sweep(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let sys = &self.system;
        sys.check_len(b.len(), "apss rhs")?;
        let alpha = self.alpha;

        let mut rhs = self.apply_a2(x)?;
        rhs.iter_mut()
            .zip(x.iter().zip(b))
            .for_each(|(v, (xi, bi))| *v = alpha * xi - *v + bi);
        let (half, _) = self.solve_shift_a1(&BlockVector::from_flat(sys, &rhs)?)?;
        let half = half.to_flat();

        let mut rhs = self.apply_a1(&half)?;
        rhs.iter_mut()
            .zip(half.iter().zip(b))
            .for_each(|(v, (hi, bi))| *v = alpha * hi - *v + bi);
        let (next, _) = self.solve_shift_a2(&BlockVector::from_flat(sys, &rhs)?)?;
        Ok(next.to_flat())
    }
}

fn factorize(sys: &SaddleSystem, alpha: f64) -> Result<ExactFactors> {
    let a = sys.a().to_dense();
    let b = sys.b().to_dense();
    let c = sys.c().to_dense();
    let (n, l) = (sys.n(), sys.l());
    let velocity = nalgebra::DMatrix::identity(n, n) * alpha + a + b.transpose() * &b / alpha;
    let constraint = nalgebra::DMatrix::identity(l, l) * (alpha * alpha) + &c * c.transpose();
    Ok(ExactFactors {
        velocity: velocity.lu(),
        constraint: constraint.lu(),
    })
}

fn lu_apply(lu: &LU<f64, Dyn, Dyn>, rhs: &[f64]) -> Result<Vec<f64>> {
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|v| v.as_slice().to_vec())
        .ok_or(Error::Singular("shifted block is singular"))
}

/// `(‖𝒜₁‖_F + ‖𝒜₂‖_F) / (2 (n + m + l))`, the minimizer of [`psi`].
pub fn estimate_alpha(system: &SaddleSystem) -> f64 {
    let (a1, a2) = system.assemble_split();
    (a1.frobenius_norm() + a2.frobenius_norm()) / (2.0 * system.order() as f64)
}

/// Quadratic surrogate `Ψ(α) = 𝐧α² − α(‖𝒜₁‖_F + ‖𝒜₂‖_F) + ‖𝒜₁‖_F‖𝒜₂‖_F`.
pub fn psi(system: &SaddleSystem, alpha: f64) -> f64 {
    let (a1, a2) = system.assemble_split();
    let (f1, f2) = (a1.frobenius_norm(), a2.frobenius_norm());
    system.order() as f64 * alpha * alpha - alpha * (f1 + f2) + f1 * f2
}

/// Relative 2-norm distance, for checks on preconditioner outputs.
pub fn relative_difference(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(b)
}
