//! The numerical-experiment protocol: scale the system, build the right-hand
//! side whose exact solution is all ones, start from zero, and run one of the
//! three methods until `‖b − 𝒜x‖/‖b‖ ≤ tol` or `maxit`.

use crate::apss::{estimate_alpha, ApssOperator, ApssOptions};
use crate::error::{Error, Result};
use crate::krylov::{fgmres, FgmresOptions, SolveReport};
use crate::saddle::{SaddleSystem, ScalingRecord};

/// Restart length that the unpreconditioned baseline runs with.
pub const BASELINE_RESTART: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// GMRES without preconditioning.
    Fgmres,
    /// Flexible GMRES right-preconditioned with `M_α`, no restarts.
    FgmresApss,
    /// The stationary two-half-step iteration.
    Apss,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fgmres => "fgmres",
            Method::FgmresApss => "fgmres+apss",
            Method::Apss => "apss",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fgmres" => Ok(Method::Fgmres),
            "fgmres+apss" => Ok(Method::FgmresApss),
            "apss" => Ok(Method::Apss),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?} (expected fgmres, fgmres+apss or apss)"
            ))),
        }
    }
}

/// Shift selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Estimate,
    Value(f64),
}

impl std::str::FromStr for AlphaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "est" {
            return Ok(AlphaChoice::Estimate);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("alpha must be `est` or a number, got {s:?}")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {v}")));
        }
        Ok(AlphaChoice::Value(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub alpha: AlphaChoice,
    pub tol: f64,
    pub maxit: usize,
    /// `None` picks the method default: [`BASELINE_RESTART`] for the
    /// unpreconditioned baseline, no restarts with the preconditioner.
    pub restart: Option<usize>,
    pub apss: ApssOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::FgmresApss,
            alpha: AlphaChoice::Estimate,
            tol: 1e-7,
            maxit: 2000,
            restart: None,
            apss: ApssOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// `None` for the unpreconditioned baseline.
    pub alpha: Option<f64>,
    pub alpha_est: f64,
    pub solution: Vec<f64>,
    pub report: SolveReport,
}

/// A system prepared for the protocol.
#[derive(Debug, Clone)]
pub struct PreparedSystem {
    pub scaled: SaddleSystem,
    pub scaling: ScalingRecord,
    pub rhs: Vec<f64>,
    pub alpha_est: f64,
}

pub fn prepare(sys: &SaddleSystem) -> PreparedSystem {
    let (scaled, scaling) = sys.scale();
    let rhs = scaled.rhs_for_ones();
    let alpha_est = estimate_alpha(&scaled);
    PreparedSystem {
        scaled,
        scaling,
        rhs,
        alpha_est,
    }
}

impl PreparedSystem {
    pub fn resolve_alpha(&self, choice: AlphaChoice) -> f64 {
        match choice {
            AlphaChoice::Estimate => self.alpha_est,
            AlphaChoice::Value(v) => v,
        }
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<RunOutcome> {
        let sys = &self.scaled;
        let x0 = vec![0.0; sys.order()];
        let apply = |v: &[f64], out: &mut [f64]| sys.apply_into(v, out);
        let (alpha, (solution, report)) = match cfg.method {
            Method::Fgmres => {
                let opts = FgmresOptions {
                    tol: cfg.tol,
                    maxit: cfg.maxit,
                    restart: Some(cfg.restart.unwrap_or(BASELINE_RESTART)),
                };
                (None, fgmres(apply, |r: &[f64]| Ok(r.to_vec()), &self.rhs, &x0, &opts)?)
            }
            Method::FgmresApss => {
                let alpha = self.resolve_alpha(cfg.alpha);
                let op = ApssOperator::new(sys.clone(), alpha, cfg.apss)?;
                let opts = FgmresOptions {
                    tol: cfg.tol,
                    maxit: cfg.maxit,
                    restart: cfg.restart,
                };
                let out = fgmres(apply, |r: &[f64]| op.apply_preconditioner(r), &self.rhs, &x0, &opts)?;
                (Some(alpha), out)
            }
            Method::Apss => {
                let alpha = self.resolve_alpha(cfg.alpha);
                let op = ApssOperator::new(sys.clone(), alpha, cfg.apss)?;
                (Some(alpha), op.iterate(&self.rhs, &x0, cfg.tol, cfg.maxit)?)
            }
        };
        Ok(RunOutcome {
            alpha,
            alpha_est: self.alpha_est,
            solution,
            report,
        })
    }
}
