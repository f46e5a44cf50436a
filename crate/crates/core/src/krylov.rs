//! Conjugate gradients for the SPD inner systems and flexible GMRES with
//! right preconditioning for the outer nonsymmetric iteration.
//!
//! Both solvers take the operator as a closure `(x, y) ↦ y = Op x` so callers
//! can compose matrix-free products without materializing anything.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::vector::{axpy, dot, norm};

/// Outcome of an iterative run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub wall_seconds: f64,
    /// Relative residual of the returned iterate, evaluated directly.
    pub final_residual: f64,
}

/// Unpreconditioned CG. Stops once `‖b − Op x‖ ≤ reduction · ‖b − Op x0‖`.
///
/// `residual_history` is relative to the initial residual. After `maxit`
/// steps without reaching the reduction, the iterate with the smallest
/// residual is returned with `converged = false`.
pub fn cg<F>(mut apply: F, b: &[f64], x0: &[f64], reduction: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(reduction > 0.0 && reduction < 1.0) {
        return Err(Error::InvalidArgument(format!("CG reduction {reduction} not in (0, 1)")));
    }
    if x0.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "cg x0",
            expected: b.len(),
            actual: x0.len(),
        });
    }
    let start = Instant::now();
    let dim = b.len();
    let mut x = x0.to_vec();
    let mut ap = vec![0.0; dim];
    apply(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let r0 = norm(&r);
    let mut history = vec![1.0];
    if r0 == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
                wall_seconds: start.elapsed().as_secs_f64(),
                final_residual: 0.0,
            },
        ));
    }

    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best = (1.0, x.clone());
    for it in 1..=maxit {
        apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 {
            return Err(Error::CgBreakdown {
                iteration: it,
                curvature,
                iterate: x,
            });
        }
        let step = rr / curvature;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / r0;
        history.push(rel);
        if rel <= reduction {
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    residual_history: history,
                    converged: true,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    final_residual: rel,
                },
            ));
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }
    let (rel, x) = best;
    Ok((
        x,
        SolveReport {
            iterations: maxit,
            residual_history: history,
            converged: false,
            wall_seconds: start.elapsed().as_secs_f64(),
            final_residual: rel,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgmresOptions {
    /// Relative residual target `‖b − 𝒜x‖/‖b‖`.
    pub tol: f64,
    /// Total Arnoldi steps over all cycles.
    pub maxit: usize,
    /// Cycle length; `None` keeps every direction (no restarts).
    pub restart: Option<usize>,
}

impl Default for FgmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            maxit: 2000,
            restart: None,
        }
    }
}

/// Loss-of-orthogonality trigger for the second Gram–Schmidt pass.
const REORTH_THRESHOLD: f64 = 1e-3;
/// Relative size of the new Arnoldi vector treated as a happy breakdown.
const BREAKDOWN_TOL: f64 = 1e-14;

/// Flexible GMRES with right preconditioning.
///
/// `precond` may change from call to call (inner iterative solves); the
/// preconditioned directions are stored so the update stays exact. The
/// least-squares residual drives termination and is confirmed with one true
/// residual evaluation; if the confirmation fails a fresh cycle starts from
/// the current iterate.
pub fn fgmres<A, P>(
    mut apply: A,
    mut precond: P,
    b: &[f64],
    x0: &[f64],
    opts: &FgmresOptions,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    if opts.maxit == 0 {
        return Err(Error::InvalidArgument("maxit must be at least 1".into()));
    }
    if opts.restart == Some(0) {
        return Err(Error::InvalidArgument("restart length must be at least 1".into()));
    }
    if x0.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "fgmres x0",
            expected: b.len(),
            actual: x0.len(),
        });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let start = Instant::now();
    let dim = b.len();
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    let mut total = 0usize;
    let mut r = vec![0.0; dim];
    let mut w = vec![0.0; dim];

    loop {
        apply(&x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(ri, (bi, wi))| *ri = bi - wi);
        let beta = norm(&r);
        let rel = beta / bnorm;
        if history.is_empty() {
            history.push(rel);
        }
        if rel <= opts.tol || total >= opts.maxit {
            return Ok((
                x,
                SolveReport {
                    iterations: total,
                    residual_history: history,
                    converged: rel <= opts.tol,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    final_residual: rel,
                },
            ));
        }

        let cycle = opts.restart.unwrap_or(opts.maxit).min(opts.maxit - total);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(cycle);
        // Columns of the rotated Hessenberg matrix, i.e. the triangular factor.
        let mut rcols: Vec<Vec<f64>> = Vec::with_capacity(cycle);
        let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(cycle);
        let mut g = vec![beta];
        let mut breakdown = false;

        for j in 0..cycle {
            let z = precond(&basis[j])?;
            apply(&z, &mut w);
            let wnorm0 = norm(&w);
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(&w, v);
                axpy(-h[i], v, &mut w);
            }
            let mut hn = norm(&w);
            if hn < REORTH_THRESHOLD * wnorm0 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[i] += c;
                    axpy(-c, v, &mut w);
                }
                hn = norm(&w);
            }
            h[j + 1] = hn;

            for (i, &(c, s)) in rotations.iter().enumerate() {
                let t = c * h[i] + s * h[i + 1];
                h[i + 1] = -s * h[i] + c * h[i + 1];
                h[i] = t;
            }
            let rho = h[j].hypot(h[j + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (h[j] / rho, h[j + 1] / rho) };
            rotations.push((c, s));
            h[j] = rho;
            h.truncate(j + 1);
            g.push(-s * g[j]);
            g[j] *= c;

            rcols.push(h);
            directions.push(z);
            total += 1;
            history.push(g[j + 1].abs() / bnorm);

            breakdown = hn <= BREAKDOWN_TOL * wnorm0.max(f64::MIN_POSITIVE);
            if g[j + 1].abs() / bnorm <= opts.tol || breakdown || total >= opts.maxit {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }

        // back substitution on the triangular factor
        let k = rcols.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                acc -= rcols[jj][i] * yj;
            }
            y[i] = if rcols[i][i] == 0.0 { 0.0 } else { acc / rcols[i][i] };
        }
        for (yi, z) in y.iter().zip(&directions) {
            axpy(*yi, z, &mut x);
        }

        if breakdown {
            apply(&x, &mut w);
            let rel = b.iter().zip(&w).map(|(bi, wi)| (bi - wi).powi(2)).sum::<f64>().sqrt() / bnorm;
            if rel > opts.tol {
                // stagnation on a singular operator: no further progress possible
                return Ok((
                    x,
                    SolveReport {
                        iterations: total,
                        residual_history: history,
                        converged: false,
                        wall_seconds: start.elapsed().as_secs_f64(),
                        final_residual: rel,
                    },
                ));
            }
        }
    }
}
