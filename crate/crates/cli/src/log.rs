use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// One line of the JSON-lines run log.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: &'static str,
    pub params: Value,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub converged: Option<bool>,
    pub wall_seconds: f64,
}

pub fn append(path: &Path, record: &RunRecord) -> anyhow::Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening run log {}", path.display()))?;
    let line = serde_json::to_string(record)?;
    writeln!(file, "{line}").with_context(|| format!("writing run log {}", path.display()))
}
