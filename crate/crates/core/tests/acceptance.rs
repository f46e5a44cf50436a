//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p apss-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use apss_core::analysis::{
    build_iteration_matrix, build_similar_matrix, certify, multisets_match, preconditioned_spectrum,
    spectrum, AnalysisOptions,
};
use apss_core::apss::{estimate_alpha, ApssOperator, ApssOptions, InnerMode};
use apss_core::dense::DEFAULT_DENSE_CAP;
use apss_core::experiment::{prepare, AlphaChoice, Method, RunConfig};
use apss_core::problems::{gen_kron_example, CStacking};
use apss_core::SaddleSystem;
use num_complex::Complex64;

use common::{matvec, oracle_f, oracle_m, oracle_t, random_systems, random_vec, rel_err};

type Outcome = Result<String, String>;

fn kron(p: usize) -> SaddleSystem {
    gen_kron_example(p, CStacking::Distinct).expect("even p")
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took > budget {
        return Err(format!("{what} took {took:.2?}, budget {budget:?}"));
    }
    Ok(())
}

/// 1. α_est on the scaled Kronecker example within ±5% of 0.0434, 0.0219, 0.0110.
fn alpha_estimates() -> Outcome {
    let mut details = Vec::new();
    for (p, target) in [(8, 0.0434), (16, 0.0219), (32, 0.0110)] {
        let start = Instant::now();
        let (scaled, _) = kron(p).scale();
        let est = estimate_alpha(&scaled);
        within_budget(start, Duration::from_secs(1), &format!("alpha_est p={p}"))?;
        let rel = (est - target).abs() / target;
        details.push(format!("p={p}: {est:.4}"));
        if rel > 0.05 {
            return Err(format!("p={p}: alpha_est {est:.5} deviates {:.1}% from {target}", rel * 100.0));
        }
    }
    Ok(details.join(", "))
}

/// 2. FGMRES + APSS (α_est, tol 1e-7, inner CG 1e-3 / 200) iteration counts.
fn preconditioned_counts() -> Outcome {
    let mut details = Vec::new();
    for (p, lo, hi) in [(8, 9, 20), (16, 10, 21), (32, 11, 22)] {
        let start = Instant::now();
        let out = prepare(&kron(p))
            .run(&RunConfig {
                method: Method::FgmresApss,
                alpha: AlphaChoice::Estimate,
                tol: 1e-7,
                maxit: 2000,
                restart: None,
                apss: ApssOptions::default(),
            })
            .map_err(|e| e.to_string())?;
        within_budget(start, Duration::from_secs(60), &format!("fgmres+apss p={p}"))?;
        let it = out.report.iterations;
        details.push(format!("p={p}: IT={it} RES={:.1e}", out.report.final_residual));
        if !out.report.converged || out.report.final_residual > 1e-7 {
            return Err(format!("p={p}: not converged (RES {:.2e})", out.report.final_residual));
        }
        if it < lo || it > hi {
            return Err(format!("p={p}: IT={it} outside [{lo}, {hi}]"));
        }
    }
    Ok(details.join(", "))
}

/// 3. Unpreconditioned baseline: 659 ± 25% at p=8, no convergence within 2000 at p=32.
fn unpreconditioned_counts() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig {
        method: Method::Fgmres,
        ..RunConfig::default()
    };
    let out8 = prepare(&kron(8)).run(&cfg).map_err(|e| e.to_string())?;
    let it8 = out8.report.iterations;
    let (lo, hi) = (659.0 * 0.75, 659.0 * 1.25);
    if !out8.report.converged || (it8 as f64) < lo || (it8 as f64) > hi {
        return Err(format!(
            "p=8: IT={it8} converged={} outside [{lo}, {hi}]",
            out8.report.converged
        ));
    }
    let out32 = prepare(&kron(32)).run(&cfg).map_err(|e| e.to_string())?;
    if out32.report.converged {
        return Err(format!("p=32 converged in {} iterations; expected the dagger", out32.report.iterations));
    }
    within_budget(start, Duration::from_secs(60), "baseline runs")?;
    Ok(format!(
        "p=8: IT={it8} RES={:.1e}; p=32: † (RES {:.1e} after {})",
        out8.report.final_residual, out32.report.final_residual, out32.report.iterations
    ))
}

struct CertifiedSystem {
    label: String,
    system: SaddleSystem,
}

fn certified_systems() -> Vec<CertifiedSystem> {
    let mut out: Vec<CertifiedSystem> = [2, 4, 6, 8]
        .into_iter()
        .map(|p| CertifiedSystem {
            label: format!("kron(p={p})"),
            system: kron(p).scale().0,
        })
        .collect();
    out.extend(random_systems(20).into_iter().map(|(label, system)| CertifiedSystem { label, system }));
    out
}

fn alpha_grid(sys: &SaddleSystem) -> [f64; 5] {
    [0.01, 0.1, estimate_alpha(sys), 1.0, 10.0]
}

/// 4. Semi-convergence certificate, and 7. disk containment of 2α·M_α⁻¹𝒜.
fn certificates() -> (Outcome, Outcome) {
    let start = Instant::now();
    let opts = AnalysisOptions::default();
    let mut worst_theta: f64 = 0.0;
    let mut worst_kellogg: f64 = 0.0;
    let mut worst_disk: f64 = 0.0;
    let mut cert_err = None;
    let mut disk_err = None;
    let mut count = 0;

    for cs in certified_systems() {
        for alpha in alpha_grid(&cs.system) {
            count += 1;
            let cert = match certify(&cs.system, alpha, &opts) {
                Ok(c) => c,
                Err(e) => {
                    cert_err.get_or_insert(format!("{} alpha={alpha}: {e}", cs.label));
                    continue;
                }
            };
            worst_theta = worst_theta.max(cert.pseudo_spectral_radius);
            worst_kellogg = worst_kellogg.max(cert.kellogg_a1).max(cert.kellogg_a2);
            let ok = cert.pseudo_spectral_radius < 1.0 - 1e-10
                && cert.unit_eigen_count >= 1
                && cert.index_one
                && cert.kellogg_a1 <= 1.0 + 1e-8
                && cert.kellogg_a2 <= 1.0 + 1e-8;
            if !ok && cert_err.is_none() {
                cert_err = Some(format!(
                    "{} alpha={alpha}: theta={} units={} index_one={} kellogg=({}, {})",
                    cs.label,
                    cert.pseudo_spectral_radius,
                    cert.unit_eigen_count,
                    cert.index_one,
                    cert.kellogg_a1,
                    cert.kellogg_a2
                ));
            }

            match preconditioned_spectrum(&cs.system, alpha, DEFAULT_DENSE_CAP) {
                Ok(mu) => {
                    let one = Complex64::new(1.0, 0.0);
                    let far = mu.iter().map(|m| (one - m * (2.0 * alpha)).norm()).fold(0.0, f64::max);
                    worst_disk = worst_disk.max(far);
                    if far > 1.0 + 1e-8 && disk_err.is_none() {
                        disk_err = Some(format!("{} alpha={alpha}: max |1 - 2αμ| = {far}", cs.label));
                    }
                }
                Err(e) => {
                    disk_err.get_or_insert(format!("{} alpha={alpha}: {e}", cs.label));
                }
            }
        }
    }
    let budget = within_budget(start, Duration::from_secs(600), "certificates");
    let cert = match (cert_err, &budget) {
        (Some(e), _) => Err(e),
        (None, Err(e)) => Err(e.clone()),
        (None, Ok(())) => Ok(format!(
            "{count} (system, alpha) pairs; max theta={worst_theta:.10}, max Kellogg={worst_kellogg:.12}"
        )),
    };
    let disk = match disk_err {
        Some(e) => Err(e),
        None => Ok(format!("{count} spectra; max |1 - 2αμ| = {worst_disk:.12}")),
    };
    (cert, disk)
}

/// 5. Dense oracle equivalences on systems of order ≤ 50.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let exact = ApssOptions {
        inner_mode: InnerMode::Exact,
        ..Default::default()
    };
    let mut systems = vec![("kron(p=2)".to_string(), kron(2).scale().0)];
    systems.extend(random_systems(5));
    let (mut worst_inv, mut worst_sweep) = (0.0f64, 0.0f64);
    let mut checked = 0;
    for (label, sys) in &systems {
        if sys.order() > 50 {
            return Err(format!("{label} has order {} > 50", sys.order()));
        }
        let b = sys.rhs_for_ones();
        for (k, alpha) in [0.1, estimate_alpha(sys), 1.0].into_iter().enumerate() {
            let op = ApssOperator::new(sys.clone(), alpha, exact).map_err(|e| e.to_string())?;
            let m = oracle_m(sys, alpha);
            let r = random_vec(7 + k as u64, sys.order());
            let z = op.apply_preconditioner(&r).map_err(|e| e.to_string())?;
            let e_inv = rel_err(&matvec(&m, &z), &r);
            worst_inv = worst_inv.max(e_inv);

            let x = random_vec(70 + k as u64, sys.order());
            let swept = op.sweep(&x, &b).map_err(|e| e.to_string())?;
            let mut expect = matvec(&oracle_t(sys, alpha), &x);
            expect.iter_mut().zip(oracle_f(sys, alpha, &b)).for_each(|(e, f)| *e += f);
            let e_sweep = rel_err(&swept, &expect);
            worst_sweep = worst_sweep.max(e_sweep);

            let t = build_iteration_matrix(sys, alpha, DEFAULT_DENSE_CAP).map_err(|e| e.to_string())?;
            let l = build_similar_matrix(sys, alpha, DEFAULT_DENSE_CAP).map_err(|e| e.to_string())?;
            let (st, sl) = (spectrum(&t).map_err(|e| e.to_string())?, spectrum(&l).map_err(|e| e.to_string())?);
            if e_inv > 1e-10 {
                return Err(format!("{label} alpha={alpha}: M_α·apply_preconditioner(r) off by {e_inv:e}"));
            }
            if e_sweep > 1e-10 {
                return Err(format!("{label} alpha={alpha}: sweep vs T x + f off by {e_sweep:e}"));
            }
            if !multisets_match(&st, &sl, 1e-7) {
                return Err(format!("{label} alpha={alpha}: spectra of T_α and L_α differ"));
            }
            checked += 1;
        }
    }
    within_budget(start, Duration::from_secs(60), "oracle checks")?;
    Ok(format!(
        "{checked} cases; max inverse error {worst_inv:.1e}, max sweep error {worst_sweep:.1e}"
    ))
}

/// 6. Stationary APSS with exact inner solves reaches 1e-7 on kron(p=4) at α_est.
fn stationary_semi_convergence() -> Outcome {
    let start = Instant::now();
    let prepared = prepare(&kron(4));
    let sys = &prepared.scaled;
    let op = ApssOperator::new(
        sys.clone(),
        prepared.alpha_est,
        ApssOptions {
            inner_mode: InnerMode::Exact,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let mut starts = vec![vec![0.0; sys.order()]];
    starts.extend((0..5).map(|k| random_vec(500 + k, sys.order())));
    let mut its = Vec::new();
    for (k, x0) in starts.iter().enumerate() {
        let (_, rep) = op.iterate(&prepared.rhs, x0, 1e-7, 50_000).map_err(|e| e.to_string())?;
        if !rep.converged || rep.final_residual > 1e-7 {
            return Err(format!("start {k}: RES {:.2e} after {}", rep.final_residual, rep.iterations));
        }
        its.push(rep.iterations);
    }
    within_budget(start, Duration::from_secs(60), "stationary runs")?;
    Ok(format!("alpha_est={:.4}, sweeps per start {its:?}", prepared.alpha_est))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 alpha_est reproduction", alpha_estimates()),
        ("2 preconditioned iteration counts", preconditioned_counts()),
        ("3 unpreconditioned iteration counts", unpreconditioned_counts()),
    ];
    let (cert, disk) = certificates();
    results.push(("4 semi-convergence certificate", cert));
    results.push(("5 oracle equivalence", oracle_equivalence()));
    results.push(("6 stationary semi-convergence", stationary_semi_convergence()));
    results.push(("7 spectrum disk containment", disk));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
