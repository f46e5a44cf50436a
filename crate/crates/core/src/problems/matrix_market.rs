//! MatrixMarket coordinate format (`real`, `general` or `symmetric`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text).map_err(|msg| Error::MatrixMarket {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn save_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

/// Serializes with 17 significant digits so values survive a round trip.
pub fn format_matrix_market(m: &SparseMatrix) -> String {
    let mut out = String::with_capacity(32 * (m.nnz() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    out
}

pub fn parse_matrix_market(text: &str) -> std::result::Result<SparseMatrix, String> {
    let mut lines = text.lines();
    let banner = lines.next().ok_or("empty file")?;
    let symmetry = parse_banner(banner)?;

    let mut body = lines.filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let size_line = body.next().ok_or("missing size line")?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| format!("bad size line {size_line:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let [rows, cols, nnz] = sizes[..] else {
        return Err(format!("size line needs three integers, got {size_line:?}"));
    };
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(format!("symmetric matrix must be square, got {rows}x{cols}"));
    }

    let mut entries = Vec::with_capacity(if symmetry == Symmetry::Symmetric { 2 * nnz } else { nnz });
    let mut count = 0;
    for line in body {
        count += 1;
        if count > nnz {
            return Err(format!("more than the declared {nnz} entries"));
        }
        let mut tok = line.split_whitespace();
        let (Some(i), Some(j), Some(v), None) = (tok.next(), tok.next(), tok.next(), tok.next()) else {
            return Err(format!("entry line {count} is not `row col value`: {line:?}"));
        };
        let i: usize = i.parse().map_err(|e| format!("entry {count}: bad row: {e}"))?;
        let j: usize = j.parse().map_err(|e| format!("entry {count}: bad column: {e}"))?;
        let v: f64 = v.parse().map_err(|e| format!("entry {count}: bad value: {e}"))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(format!("entry {count}: index ({i}, {j}) outside {rows}x{cols}"));
        }
        entries.push((i - 1, j - 1, v));
        if symmetry == Symmetry::Symmetric && i != j {
            entries.push((j - 1, i - 1, v));
        }
    }
    if count != nnz {
        return Err(format!("declared {nnz} entries but found {count}"));
    }
    SparseMatrix::from_triplets(rows, cols, entries).map_err(|e| e.to_string())
}

fn parse_banner(line: &str) -> std::result::Result<Symmetry, String> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(format!("malformed banner {line:?}"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(format!("only `matrix coordinate` is supported, got {line:?}"));
    }
    if tokens[3] != "real" {
        return Err(format!("unsupported field {:?}; only real is accepted", tokens[3]));
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(format!("unsupported symmetry {other:?}")),
    }
}
