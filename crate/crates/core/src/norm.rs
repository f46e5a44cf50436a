//! Power iteration for operator 2-norms.

/// Default relative-change tolerance for [`operator_two_norm`].
pub const DEFAULT_NORM_TOL: f64 = 1e-10;
/// Default iteration cap for [`operator_two_norm`].
pub const DEFAULT_NORM_MAXIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when `maxit` was hit before the relative change dropped below `tol`.
    pub converged: bool,
}

/// Estimates `‖G‖₂` by power iteration on `Gᵀ G`, where `apply` computes
/// `G x` and `adjoint` computes `Gᵀ y`.
pub fn operator_two_norm<F, G>(mut apply: F, mut adjoint: G, dim: usize, tol: f64, maxit: usize) -> NormEstimate
where
    F: FnMut(&[f64]) -> Vec<f64>,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    if dim == 0 {
        return NormEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    // Deterministic start with no special alignment to coordinate axes.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    normalize(&mut v);

    let mut lambda_prev = f64::NAN;
    for it in 1..=maxit {
        let w = adjoint(&apply(&v));
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wnorm == 0.0 {
            return NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        if (lambda - lambda_prev).abs() <= tol * lambda.abs() {
            return NormEstimate {
                value: lambda.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            };
        }
        lambda_prev = lambda;
        v = w;
        v.iter_mut().for_each(|x| *x /= wnorm);
    }
    NormEstimate {
        value: lambda_prev.max(0.0).sqrt(),
        iterations: maxit,
        converged: false,
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}
