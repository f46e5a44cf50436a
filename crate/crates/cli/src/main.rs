mod args;
mod log;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use apss_core::analysis::{
    build_iteration_matrix, certify, preconditioned_spectrum, pseudo_spectral_radius, spectrum,
    write_eigenvalues_csv, AnalysisOptions,
};
use apss_core::apss::ApssOptions;
use apss_core::experiment::{prepare, AlphaChoice, Method, PreparedSystem, RunConfig, RunOutcome};
use apss_core::problems::{gen_kron_example, gen_random_singular, load_system, save_system, Manifest};
use apss_core::Error;
use clap::Parser;
use serde_json::json;

use args::{parse_grid, AnalyzeArgs, Cli, Command, GenKind, SolveArgs, SolverArgs, SweepArgs};
use log::RunRecord;

/// Exit status when a solve stops at `maxit` without meeting the tolerance.
const EXIT_NOT_CONVERGED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    match &cli.command {
        Command::Gen { kind } => cmd_gen(kind, &cli.log, start),
        Command::Solve(a) => cmd_solve(a, &cli.log, start),
        Command::Analyze(a) => cmd_analyze(a, &cli.log, start),
        Command::Sweep(a) => cmd_sweep(a, &cli.log, start),
    }
}

fn cmd_gen(kind: &GenKind, log_path: &Path, start: Instant) -> anyhow::Result<ExitCode> {
    let (sys, out, mut meta, seed) = match *kind {
        GenKind::Kron { p, stacking, ref out } => {
            let sys = gen_kron_example(p, stacking.into())?;
            let meta = BTreeMap::from([
                ("kind".to_string(), "kron".to_string()),
                ("p".to_string(), p.to_string()),
                ("stacking".to_string(), format!("{stacking:?}").to_lowercase()),
            ]);
            (sys, out, meta, None)
        }
        GenKind::Random { n, m, l, deficiency, seed, ref out } => {
            let sys = gen_random_singular(n, m, l, deficiency, seed)?;
            let meta = BTreeMap::from([
                ("kind".to_string(), "random".to_string()),
                ("n".to_string(), n.to_string()),
                ("m".to_string(), m.to_string()),
                ("l".to_string(), l.to_string()),
                ("deficiency".to_string(), deficiency.to_string()),
                ("seed".to_string(), seed.to_string()),
            ]);
            (sys, out, meta, Some(seed))
        }
    };
    meta.insert("dof".to_string(), sys.order().to_string());
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = save_system(&sys, out, meta.clone())?;
    println!("wrote {} (dof {})", manifest.display(), sys.order());
    log::append(
        log_path,
        &RunRecord {
            command: "gen",
            params: json!(meta),
            seed,
            iterations: None,
            residual: None,
            converged: None,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn load(manifest: &Path) -> anyhow::Result<(PreparedSystem, Manifest)> {
    let (sys, m) = load_system(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    Ok((prepare(&sys), m))
}

fn manifest_seed(m: &Manifest) -> Option<u64> {
    m.meta.get("seed").and_then(|s| s.parse().ok())
}

fn run_config(s: &SolverArgs, alpha: AlphaChoice) -> anyhow::Result<RunConfig> {
    if s.tol.is_nan() || s.tol <= 0.0 {
        bail!("--tol must be positive, got {}", s.tol);
    }
    Ok(RunConfig {
        method: s.method,
        alpha,
        tol: s.tol,
        maxit: s.maxit,
        restart: s.restart,
        apss: ApssOptions {
            inner_reduction: s.inner_reduction,
            inner_maxit: s.inner_maxit,
            inner_mode: s.inner.into(),
        },
    })
}

fn solver_params(s: &SolverArgs) -> serde_json::Value {
    json!({
        "method": s.method.name(),
        "tol": s.tol,
        "maxit": s.maxit,
        "restart": s.restart,
        "inner": format!("{:?}", s.inner).to_lowercase(),
        "inner_reduction": s.inner_reduction,
        "inner_maxit": s.inner_maxit,
    })
}

/// Iteration count, or a dagger when the run hit `maxit`.
fn it_cell(out: &RunOutcome) -> String {
    if out.report.converged {
        out.report.iterations.to_string()
    } else {
        "†".to_string()
    }
}

fn cmd_solve(a: &SolveArgs, log_path: &Path, start: Instant) -> anyhow::Result<ExitCode> {
    let (prepared, manifest) = load(&a.manifest)?;
    let cfg = run_config(&a.solver, a.alpha)?;
    let out = prepared.run(&cfg)?;

    println!("order = {}", prepared.scaled.order());
    match out.alpha {
        Some(alpha) => println!("alpha = {alpha:.4} (alpha_est = {:.4})", out.alpha_est),
        None => println!("alpha = - (alpha_est = {:.4})", out.alpha_est),
    }
    println!("{:<12} {:>6} {:>10} {:>10}", "method", "IT", "CPU", "RES");
    println!(
        "{:<12} {:>6} {:>10.4} {:>10.2e}",
        cfg.method.name(),
        it_cell(&out),
        out.report.wall_seconds,
        out.report.final_residual
    );

    let mut csv = String::from("k,res\n");
    for (k, r) in out.report.residual_history.iter().enumerate() {
        let _ = writeln!(csv, "{k},{r:.16e}");
    }
    fs::write(&a.history, csv).with_context(|| format!("writing {}", a.history.display()))?;

    let mut params = solver_params(&a.solver);
    params["manifest"] = json!(a.manifest);
    params["alpha"] = json!(out.alpha);
    params["alpha_est"] = json!(out.alpha_est);
    log::append(
        log_path,
        &RunRecord {
            command: "solve",
            params,
            seed: manifest_seed(&manifest),
            iterations: Some(out.report.iterations),
            residual: Some(out.report.final_residual),
            converged: Some(out.report.converged),
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(if out.report.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn dense_hint(e: Error) -> anyhow::Error {
    match e {
        Error::DenseCapExceeded { order, cap } => anyhow::anyhow!(
            "system order {order} exceeds the dense cap {cap}; use a smaller problem (e.g. gen kron --p 8) \
             or raise --dense-cap"
        ),
        other => other.into(),
    }
}

fn cmd_analyze(a: &AnalyzeArgs, log_path: &Path, start: Instant) -> anyhow::Result<ExitCode> {
    let grid = parse_grid(&a.alpha)?;
    let (prepared, manifest) = load(&a.manifest)?;
    let sys = &prepared.scaled;
    let opts = AnalysisOptions {
        dense_cap: a.dense_cap,
        ..Default::default()
    };
    apss_core::dense::check_dense_cap(sys.order(), a.dense_cap).map_err(dense_hint)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let eigs_a = spectrum(&sys.assemble_full().to_dense())?;
    write_eigenvalues_csv(a.out.join("eigs_A.csv"), &eigs_a)?;

    println!("order = {}, alpha_est = {:.4}", sys.order(), prepared.alpha_est);
    println!(
        "{:>12} {:>14} {:>6} {:>9} {:>14} {:>14}",
        "alpha", "theta", "units", "index1", "kellogg_A1", "kellogg_A2"
    );
    let mut certs = Vec::new();
    for point in grid {
        let alpha = point.resolve(prepared.alpha_est);
        let cert = certify(sys, alpha, &opts).map_err(dense_hint)?;
        println!(
            "{:>12.6} {:>14.10} {:>6} {:>9} {:>14.10} {:>14.10}",
            alpha, cert.pseudo_spectral_radius, cert.unit_eigen_count, cert.index_one, cert.kellogg_a1, cert.kellogg_a2
        );
        let mu = preconditioned_spectrum(sys, alpha, a.dense_cap)?;
        write_eigenvalues_csv(a.out.join(format!("eigs_precond_alpha={alpha}.csv")), &mu)?;
        certs.push(json!({
            "alpha": alpha,
            "theta": cert.pseudo_spectral_radius,
            "unit_eigen_count": cert.unit_eigen_count,
            "index_one": cert.index_one,
            "kellogg_a1": cert.kellogg_a1,
            "kellogg_a2": cert.kellogg_a2,
        }));
    }
    log::append(
        log_path,
        &RunRecord {
            command: "analyze",
            params: json!({ "manifest": a.manifest, "alpha": a.alpha, "certificates": certs }),
            seed: manifest_seed(&manifest),
            iterations: None,
            residual: None,
            converged: None,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: &SweepArgs, log_path: &Path, start: Instant) -> anyhow::Result<ExitCode> {
    let grid = parse_grid(&a.alphas)?;
    if a.solver.method == Method::Fgmres {
        bail!("sweep varies the shift; use --method fgmres+apss or apss");
    }
    let (prepared, manifest) = load(&a.manifest)?;
    let dense_ok = !a.no_theta && prepared.scaled.order() <= a.dense_cap;
    let unit_tol = AnalysisOptions::default().unit_tol;

    let mut csv = String::from("alpha,IT,CPU,RES,converged,theta,is_est\n");
    println!("{:>12} {:>6} {:>10} {:>10} {:>14}", "alpha", "IT", "CPU", "RES", "theta");
    let mut rows = Vec::new();
    for point in grid {
        let alpha = point.resolve(prepared.alpha_est);
        let out = prepared.run(&run_config(&a.solver, AlphaChoice::Value(alpha))?)?;
        let theta = if dense_ok {
            let t = build_iteration_matrix(&prepared.scaled, alpha, a.dense_cap)?;
            Some(pseudo_spectral_radius(&spectrum(&t)?, unit_tol).0)
        } else {
            None
        };
        let is_est = (alpha - prepared.alpha_est).abs() <= 1e-12 * prepared.alpha_est;
        let theta_cell = theta.map(|t| format!("{t:.16e}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{alpha:.16e},{},{:.6},{:.16e},{},{theta_cell},{}",
            out.report.iterations,
            out.report.wall_seconds,
            out.report.final_residual,
            out.report.converged,
            is_est as u8
        );
        println!(
            "{:>12.6} {:>6} {:>10.4} {:>10.2e} {:>14}{}",
            alpha,
            it_cell(&out),
            out.report.wall_seconds,
            out.report.final_residual,
            theta.map(|t| format!("{t:.10}")).unwrap_or_else(|| "-".into()),
            if is_est { "  <- alpha_est" } else { "" }
        );
        rows.push(json!({
            "alpha": alpha,
            "iterations": out.report.iterations,
            "residual": out.report.final_residual,
            "converged": out.report.converged,
            "theta": theta,
            "is_est": is_est,
        }));
    }
    fs::write(&a.out, csv).with_context(|| format!("writing {}", a.out.display()))?;

    let mut params = solver_params(&a.solver);
    params["manifest"] = json!(a.manifest);
    params["alphas"] = json!(a.alphas);
    params["alpha_est"] = json!(prepared.alpha_est);
    params["rows"] = json!(rows);
    log::append(
        log_path,
        &RunRecord {
            command: "sweep",
            params,
            seed: manifest_seed(&manifest),
            iterations: None,
            residual: None,
            converged: None,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}
