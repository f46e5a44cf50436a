//! System manifest: a small `key = value` text file naming the three block
//! files plus free-form metadata.
//!
//! ```text
//! # comment
//! A = A.mtx
//! B = B.mtx
//! C = C.mtx
//! kind = kron
//! dof = 258
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::matrix_market::{load_matrix_market, save_matrix_market};
use crate::error::{Error, Result};
use crate::saddle::SaddleSystem;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub a: PathBuf,
    pub b: PathBuf,
    pub c: PathBuf,
    pub meta: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |msg: String| Error::Manifest {
            path: path.to_path_buf(),
            msg,
        };
        let mut out = Manifest::default();
        let (mut a, mut b, mut c) = (None, None, None);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "A" => a = Some(PathBuf::from(value)),
                "B" => b = Some(PathBuf::from(value)),
                "C" => c = Some(PathBuf::from(value)),
                _ => {
                    out.meta.insert(key.to_string(), value.to_string());
                }
            }
        }
        out.a = a.ok_or_else(|| err("missing `A` entry".into()))?;
        out.b = b.ok_or_else(|| err("missing `B` entry".into()))?;
        out.c = c.ok_or_else(|| err("missing `C` entry".into()))?;
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path)?, path)
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# saddle system manifest\n");
        for (k, p) in [("A", &self.a), ("B", &self.b), ("C", &self.c)] {
            let _ = writeln!(s, "{k} = {}", p.display());
        }
        for (k, v) in &self.meta {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Loads the three blocks, resolving relative paths against `base_dir`.
    pub fn load_system(&self, base_dir: &Path) -> Result<SaddleSystem> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        SaddleSystem::new(
            load_matrix_market(resolve(&self.a))?,
            load_matrix_market(resolve(&self.b))?,
            load_matrix_market(resolve(&self.c))?,
        )
    }
}

/// Loads the system a manifest file describes.
pub fn load_system(manifest_path: impl AsRef<Path>) -> Result<(SaddleSystem, Manifest)> {
    let path = manifest_path.as_ref();
    let manifest = Manifest::load(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok((manifest.load_system(base)?, manifest))
}

/// Writes `A.mtx`, `B.mtx`, `C.mtx` and `manifest.txt` into `dir` and returns
/// the manifest path.
pub fn save_system(sys: &SaddleSystem, dir: impl AsRef<Path>, meta: BTreeMap<String, String>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    save_matrix_market(sys.a(), dir.join("A.mtx"))?;
    save_matrix_market(sys.b(), dir.join("B.mtx"))?;
    save_matrix_market(sys.c(), dir.join("C.mtx"))?;
    let manifest = Manifest {
        a: "A.mtx".into(),
        b: "B.mtx".into(),
        c: "C.mtx".into(),
        meta,
    };
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest.render())?;
    Ok(path)
}
