//! Compressed sparse row storage and the handful of kernels the solvers need.
//!
//! Matrices are immutable once built. Transposed products are computed by
//! scattering over rows, so `Bᵀ` and `Cᵀ` never have to be materialized on the
//! hot path; [`SparseMatrix::transpose`] exists for assembly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real CSR matrix with sorted, duplicate-free column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a CSR matrix from coordinate entries. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        if let Some(&(row, col, _)) = entries.iter().find(|(i, j, _)| *i >= rows || *j >= cols) {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                rows,
                cols,
            });
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == i && entries[k].1 == j {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are in bounds")
    }

    /// `scale · tridiag(lo, di, up)` of order `p`.
    pub fn tridiag(p: usize, lo: f64, di: f64, up: f64, scale: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("tridiag order must be at least 1".into()));
        }
        let mut entries = Vec::with_capacity(3 * p);
        for i in 0..p {
            if i > 0 {
                entries.push((i, i - 1, scale * lo));
            }
            entries.push((i, i, scale * di));
            if i + 1 < p {
                entries.push((i, i + 1, scale * up));
            }
        }
        Self::from_triplets(p, p, entries)
    }

    /// Kronecker product `a ⊗ b`.
    pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
        let (p, q) = (b.rows, b.cols);
        let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
        for (i, j, av) in a.triplets() {
            for (r, s, bv) in b.triplets() {
                entries.push((p * i + r, q * j + s, av * bv));
            }
        }
        Self::from_triplets(a.rows * p, a.cols * q, entries).expect("kron indices are in bounds")
    }

    /// Places signed blocks into a larger matrix. `row_sizes`/`col_sizes`
    /// describe the block partition; each part is `(block_row, block_col, sign, matrix)`.
    pub fn from_blocks(
        row_sizes: &[usize],
        col_sizes: &[usize],
        parts: &[(usize, usize, f64, &SparseMatrix)],
    ) -> Result<Self> {
        let offsets = |sizes: &[usize]| -> Vec<usize> {
            let mut acc = vec![0];
            for s in sizes {
                acc.push(acc.last().unwrap() + s);
            }
            acc
        };
        let (row_off, col_off) = (offsets(row_sizes), offsets(col_sizes));
        let mut entries = Vec::new();
        for &(bi, bj, sign, m) in parts {
            if m.rows != row_sizes[bi] {
                return Err(Error::DimensionMismatch {
                    context: "block rows",
                    expected: row_sizes[bi],
                    actual: m.rows,
                });
            }
            if m.cols != col_sizes[bj] {
                return Err(Error::DimensionMismatch {
                    context: "block cols",
                    expected: col_sizes[bj],
                    actual: m.cols,
                });
            }
            entries.extend(
                m.triplets()
                    .map(|(i, j, v)| (row_off[bi] + i, col_off[bj] + j, sign * v)),
            );
        }
        Self::from_triplets(*row_off.last().unwrap(), *col_off.last().unwrap(), entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "spmv",
                expected: self.cols,
                actual: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "spmv_transpose",
                expected: self.rows,
                actual: x.len(),
            });
        }
        let mut y = vec![0.0; self.cols];
        self.mul_transpose_vec_into(x, &mut y);
        Ok(y)
    }

    /// `y = M x`. Panics on length mismatch; the checked form is [`Self::spmv`].
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y = Mᵀ x` without forming the transpose.
    pub fn mul_transpose_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            let dst = next[j];
            col_idx[dst] = i;
            values[dst] = v;
            next[j] += 1;
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Entrywise `self + other`.
    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "add",
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()))
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        if s == 0.0 {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `diag(row_weights) · M · diag(col_weights)`.
    pub fn scale_rows_cols(&self, row_weights: &[f64], col_weights: &[f64]) -> Result<SparseMatrix> {
        if row_weights.len() != self.rows || col_weights.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "scale_rows_cols",
                expected: self.rows + self.cols,
                actual: row_weights.len() + col_weights.len(),
            });
        }
        Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets()
                .map(|(i, j, v)| (i, j, row_weights[i] * v * col_weights[j])),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn column_two_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            sq[j] += v * v;
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn from_dense(d: &DMatrix<f64>) -> SparseMatrix {
        let entries = (0..d.nrows())
            .flat_map(|i| (0..d.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, d[(i, j)]));
        Self::from_triplets(d.nrows(), d.ncols(), entries).expect("dense indices are in bounds")
    }
}
