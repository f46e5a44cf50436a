use std::path::PathBuf;

use anyhow::{bail, Context};
use apss_core::apss::InnerMode;
use apss_core::experiment::{AlphaChoice, Method};
use apss_core::problems::CStacking;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "apss", version, about = "APSS splitting toolkit for singular block 3x3 saddle point systems")]
pub struct Cli {
    /// JSON-lines run log, one record appended per command.
    #[arg(long, global = true, default_value = "apss-runs.jsonl")]
    pub log: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test problem as MatrixMarket files plus a manifest.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Scale, build the all-ones right-hand side, and solve from zero.
    Solve(SolveArgs),
    /// Dense spectral certificates for one or more shifts.
    Analyze(AnalyzeArgs),
    /// Run the solver over a grid of shifts.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Kronecker-structured example of order 4p^2 + 2.
    Kron {
        #[arg(long)]
        p: usize,
        #[arg(long, value_enum, default_value_t = StackingArg::Distinct)]
        stacking: StackingArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Random singular system with rank(C) = l - deficiency.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        deficiency: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StackingArg {
    /// (C1; c1; c2)
    Distinct,
    /// (C1; c2; c2)
    DuplicateSecond,
}

impl From<StackingArg> for CStacking {
    fn from(s: StackingArg) -> Self {
        match s {
            StackingArg::Distinct => CStacking::Distinct,
            StackingArg::DuplicateSecond => CStacking::DuplicateSecond,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InnerArg {
    /// Conjugate gradients with relative reduction --inner-reduction.
    Cg,
    /// Dense LU factorizations.
    Exact,
}

impl From<InnerArg> for InnerMode {
    fn from(i: InnerArg) -> Self {
        match i {
            InnerArg::Cg => InnerMode::Cg,
            InnerArg::Exact => InnerMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// fgmres, fgmres+apss or apss.
    #[arg(long, default_value = "fgmres+apss")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub maxit: usize,
    /// GMRES restart length (default: 50 without preconditioner, none with it).
    #[arg(long)]
    pub restart: Option<usize>,
    #[arg(long, value_enum, default_value_t = InnerArg::Cg)]
    pub inner: InnerArg,
    #[arg(long, default_value_t = 1e-3)]
    pub inner_reduction: f64,
    #[arg(long, default_value_t = 200)]
    pub inner_maxit: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// `est` or a positive number.
    #[arg(long, default_value = "est", allow_hyphen_values = true)]
    pub alpha: AlphaChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Residual history CSV (`k,res`).
    #[arg(long, default_value = "residual_history.csv")]
    pub history: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated shifts; see `sweep --help` for the syntax.
    #[arg(long, default_value = "est", allow_hyphen_values = true)]
    pub alpha: String,
    /// Directory for the eigenvalue CSV files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = apss_core::dense::DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated shifts: numbers, `est`, or multiples such as `0.25est`.
    #[arg(long, default_value = "0.25est,est,4est", allow_hyphen_values = true)]
    pub alphas: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    /// Skip the dense certificate column.
    #[arg(long)]
    pub no_theta: bool,
    #[arg(long, default_value_t = apss_core::dense::DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

/// One entry of a shift grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Value(f64),
    EstMultiple(f64),
}

impl GridPoint {
    pub fn resolve(self, alpha_est: f64) -> f64 {
        match self {
            GridPoint::Value(v) => v,
            GridPoint::EstMultiple(k) => k * alpha_est,
        }
    }
}

pub fn parse_grid(s: &str) -> anyhow::Result<Vec<GridPoint>> {
    let points = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (number, multiple) = match t.strip_suffix("est") {
                Some("") => return Ok(GridPoint::EstMultiple(1.0)),
                Some(k) => (k.trim_end_matches('*'), true),
                None => (t, false),
            };
            let v: f64 = number.parse().with_context(|| format!("bad shift {t:?}"))?;
            if !(v > 0.0 && v.is_finite()) {
                bail!("shifts must be positive, got {t:?}");
            }
            Ok(if multiple { GridPoint::EstMultiple(v) } else { GridPoint::Value(v) })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if points.is_empty() {
        bail!("empty shift list");
    }
    Ok(points)
}
