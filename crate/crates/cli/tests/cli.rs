use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn apss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apss"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen_kron(dir: &Path, p: usize) -> PathBuf {
    let out = format!("kron{p}");
    let o = apss(dir, &["gen", "kron", "--p", &p.to_string(), "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join(out).join("manifest.txt")
}

fn gen_random_seed7(dir: &Path, out: &str) -> PathBuf {
    let o = apss(
        dir,
        &["gen", "random", "--n", "20", "--m", "10", "--l", "6", "--deficiency", "2", "--seed", "7", "--out", out],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join(out).join("manifest.txt")
}

fn log_records(dir: &Path) -> Vec<Value> {
    fs::read_to_string(dir.join("apss-runs.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// IT column of the table row, `None` for a dagger.
fn table_iterations(text: &str, method: &str) -> Option<usize> {
    let row = text.lines().find(|l| l.starts_with(method)).expect("table row");
    row.split_whitespace().nth(1).unwrap().parse().ok()
}

#[test]
fn gen_kron_records_dof() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 8);
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.lines().any(|l| l == "dof = 258"), "{text}");
    for f in ["A.mtx", "B.mtx", "C.mtx"] {
        assert!(manifest.parent().unwrap().join(f).exists());
    }
    assert_eq!(log_records(dir.path())[0]["command"], "gen");
}

#[test]
fn gen_kron_rejects_odd_p() {
    let dir = TempDir::new().unwrap();
    let o = apss(dir.path(), &["gen", "kron", "--p", "7"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("even"), "{}", stderr(&o));
}

#[test]
fn gen_random_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = gen_random_seed7(dir.path(), "first");
    let b = gen_random_seed7(dir.path(), "second");
    for f in ["A.mtx", "B.mtx", "C.mtx", "manifest.txt"] {
        let fa = fs::read(a.parent().unwrap().join(f)).unwrap();
        let fb = fs::read(b.parent().unwrap().join(f)).unwrap();
        assert_eq!(fa, fb, "{f}");
    }
    assert_eq!(log_records(dir.path())[0]["seed"], 7);
}

#[test]
fn solve_preconditioned_kron_p8() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 8);
    let o = apss(
        dir.path(),
        &["solve", "--manifest", manifest.to_str().unwrap(), "--method", "fgmres+apss", "--alpha", "est"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("alpha = 0.0434"), "{text}");
    let it = table_iterations(&text, "fgmres+apss").expect("converged");
    assert!((9..=20).contains(&it), "{it}");

    let history = fs::read_to_string(dir.path().join("residual_history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(lines.next(), Some("k,res"));
    assert_eq!(lines.count(), it + 1);

    let rec = log_records(dir.path()).pop().unwrap();
    assert_eq!(rec["command"], "solve");
    assert_eq!(rec["iterations"], it);
    assert!(rec["residual"].as_f64().unwrap() <= 1e-7);
    assert!(rec["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_unpreconditioned_kron_p32_prints_dagger() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 32);
    let o = apss(dir.path(), &["solve", "--manifest", manifest.to_str().unwrap(), "--method", "fgmres"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("fgmres") && l.contains('†')), "{text}");
    assert_eq!(table_iterations(&text, "fgmres"), None);
    assert_eq!(log_records(dir.path()).pop().unwrap()["converged"], false);
}

#[test]
fn solve_stationary_random_seed7() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_random_seed7(dir.path(), "r7");
    let o = apss(
        dir.path(),
        &["solve", "--manifest", manifest.to_str().unwrap(), "--method", "apss", "--alpha", "0.5", "--tol", "1e-7"],
    );
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let rec = log_records(dir.path()).pop().unwrap();
    assert_eq!(rec["converged"], true);
    assert!(rec["residual"].as_f64().unwrap() <= 1e-7);
    assert_eq!(rec["seed"], 7);
}

#[test]
fn solve_rejects_bad_configuration() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_random_seed7(dir.path(), "r7");
    let m = manifest.to_str().unwrap();
    for args in [
        vec!["solve", "--manifest", m, "--alpha", "-1"],
        vec!["solve", "--manifest", m, "--alpha", "0"],
        vec!["solve", "--manifest", m, "--method", "gmres"],
        vec!["solve", "--manifest", m, "--tol", "0"],
        vec!["solve", "--manifest", "missing/manifest.txt"],
    ] {
        let o = apss(dir.path(), &args);
        assert!(!o.status.success(), "{args:?}");
        assert_ne!(o.status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn exact_inner_mode_reproduces_iteration_counts() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 4);
    let args = ["solve", "--manifest", manifest.to_str().unwrap(), "--inner", "exact"];
    assert!(apss(dir.path(), &args).status.success());
    assert!(apss(dir.path(), &args).status.success());
    let recs = log_records(dir.path());
    let (a, b) = (&recs[recs.len() - 2], &recs[recs.len() - 1]);
    assert_eq!(a["iterations"], b["iterations"]);
    assert_eq!(a["residual"], b["residual"]);
    assert_eq!(a["params"], b["params"]);
}

#[test]
fn analyze_kron_p4() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 4);
    let o = apss(
        dir.path(),
        &["analyze", "--manifest", manifest.to_str().unwrap(), "--alpha", "est", "--out", "eigs"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = log_records(dir.path()).pop().unwrap();
    let cert = &rec["params"]["certificates"][0];
    assert!(cert["theta"].as_f64().unwrap() < 1.0);
    assert_eq!(cert["index_one"], true);
    assert!(cert["unit_eigen_count"].as_u64().unwrap() >= 1);

    let eigs_a = fs::read_to_string(dir.path().join("eigs/eigs_A.csv")).unwrap();
    assert_eq!(eigs_a.lines().next(), Some("re,im"));
    assert_eq!(eigs_a.lines().count() - 1, 66);
    let alpha = cert["alpha"].as_f64().unwrap();
    let precond = dir.path().join(format!("eigs/eigs_precond_alpha={alpha}.csv"));
    assert_eq!(fs::read_to_string(precond).unwrap().lines().count() - 1, 66);
}

#[test]
fn analyze_rejects_zero_shift_and_oversized_systems() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 4);
    let m = manifest.to_str().unwrap();
    let o = apss(dir.path(), &["analyze", "--manifest", m, "--alpha", "0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("positive"), "{}", stderr(&o));

    let o = apss(dir.path(), &["analyze", "--manifest", m, "--dense-cap", "50"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("smaller problem"), "{}", stderr(&o));
}

fn sweep_rows(dir: &Path, file: &str) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join(file)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,IT,CPU,RES,converged,theta,is_est"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_marks_the_estimate_and_it_is_competitive() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_kron(dir.path(), 8);
    let o = apss(
        dir.path(),
        &["sweep", "--manifest", manifest.to_str().unwrap(), "--alphas", "0.25est,est,4est"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = sweep_rows(dir.path(), "sweep.csv");
    assert_eq!(rows.len(), 3);
    let marked: Vec<_> = rows.iter().filter(|r| r[6] == "1").collect();
    assert_eq!(marked.len(), 1);
    let its: Vec<usize> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let est_it: usize = marked[0][1].parse().unwrap();
    assert!(est_it <= 2 * its.iter().min().unwrap());
    for r in &rows {
        let theta: f64 = r[5].parse().unwrap();
        assert!(theta < 1.0);
    }
}

#[test]
fn sweep_single_point_and_negative_shift() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_random_seed7(dir.path(), "r7");
    let m = manifest.to_str().unwrap();
    let o = apss(dir.path(), &["sweep", "--manifest", m, "--alphas", "0.5", "--out", "one.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = sweep_rows(dir.path(), "one.csv");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][6], "0");

    let o = apss(dir.path(), &["sweep", "--manifest", m, "--alphas", "-1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("positive"), "{}", stderr(&o));
}
