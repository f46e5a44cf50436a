//! The nonsymmetric three-by-three saddle point operator
//!
//! ```text
//!     [  A   Bᵀ   0  ]
//! 𝒜 = [ -B   0  -Cᵀ ]      A: n×n SPD, B: m×n, C: l×m
//!     [  0   C    0  ]
//! ```
//!
//! together with its positive semi-definite splitting `𝒜 = 𝒜₁ + 𝒜₂`,
//!
//! ```text
//!      [  A  Bᵀ  0 ]        [ 0  0   0  ]
//! 𝒜₁ = [ -B  0   0 ],  𝒜₂ = [ 0  0  -Cᵀ ]
//!      [  0  0   0 ]        [ 0  C   0  ]
//! ```
//!
//! symmetric diagonal scaling, and the all-ones right-hand side used by the
//! experiments. Flat vectors are always ordered `(x, y, z)`.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Relative tolerance for the symmetry check on `A`.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    a: SparseMatrix,
    b: SparseMatrix,
    c: SparseMatrix,
}

impl SaddleSystem {
    /// Validates dimensions and the numerical symmetry of `A`.
    pub fn new(a: SparseMatrix, b: SparseMatrix, c: SparseMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidSystem(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.cols() != a.rows() {
            return Err(Error::InvalidSystem(format!(
                "B has {} columns but A has order {}",
                b.cols(),
                a.rows()
            )));
        }
        if c.cols() != b.rows() {
            return Err(Error::InvalidSystem(format!(
                "C has {} columns but B has {} rows",
                c.cols(),
                b.rows()
            )));
        }
        let asym = a.add(&a.transpose().scaled(-1.0))?.max_abs();
        if asym > SYMMETRY_TOL * a.frobenius_norm() {
            return Err(Error::InvalidSystem(format!(
                "A is not symmetric: max|A - Aᵀ| = {asym:e}"
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn c(&self) -> &SparseMatrix {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.rows()
    }

    pub fn l(&self) -> usize {
        self.c.rows()
    }

    /// Total order `n + m + l` (the degrees of freedom).
    pub fn order(&self) -> usize {
        self.n() + self.m() + self.l()
    }

    fn sizes(&self) -> [usize; 3] {
        [self.n(), self.m(), self.l()]
    }

    pub fn assemble_full(&self) -> SparseMatrix {
        let (bt, ct) = (self.b.transpose(), self.c.transpose());
        SparseMatrix::from_blocks(
            &self.sizes(),
            &self.sizes(),
            &[
                (0, 0, 1.0, &self.a),
                (0, 1, 1.0, &bt),
                (1, 0, -1.0, &self.b),
                (1, 2, -1.0, &ct),
                (2, 1, 1.0, &self.c),
            ],
        )
        .expect("block sizes come from the system")
    }

    /// Returns `(𝒜₁, 𝒜₂)`.
    pub fn assemble_split(&self) -> (SparseMatrix, SparseMatrix) {
        let (bt, ct) = (self.b.transpose(), self.c.transpose());
        let sizes = self.sizes();
        let a1 = SparseMatrix::from_blocks(
            &sizes,
            &sizes,
            &[(0, 0, 1.0, &self.a), (0, 1, 1.0, &bt), (1, 0, -1.0, &self.b)],
        )
        .expect("block sizes come from the system");
        let a2 = SparseMatrix::from_blocks(&sizes, &sizes, &[(1, 2, -1.0, &ct), (2, 1, 1.0, &self.c)])
            .expect("block sizes come from the system");
        (a1, a2)
    }

    /// `out = 𝒜 v`, matrix-free.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let (n, m) = (self.n(), self.m());
        let (vx, rest) = v.split_at(n);
        let (vy, vz) = rest.split_at(m);
        let (ox, rest) = out.split_at_mut(n);
        let (oy, oz) = rest.split_at_mut(m);

        self.a.mul_vec_into(vx, ox);
        let mut tmp = vec![0.0; n];
        self.b.mul_transpose_vec_into(vy, &mut tmp);
        ox.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);

        self.b.mul_vec_into(vx, oy);
        let mut tmp = vec![0.0; m];
        self.c.mul_transpose_vec_into(vz, &mut tmp);
        oy.iter_mut().zip(&tmp).for_each(|(o, t)| *o = -*o - t);

        self.c.mul_vec_into(vy, oz);
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len(), "saddle apply")?;
        let mut out = vec![0.0; self.order()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn check_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.order() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.order(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Symmetric diagonal scaling `D^{-1/2} 𝒜 D^{-1/2}` with `D` the column
    /// 2-norms of `𝒜`. Zero columns get weight 1.
    pub fn scale(&self) -> (SaddleSystem, ScalingRecord) {
        let d: Vec<f64> = self
            .assemble_full()
            .column_two_norms()
            .into_iter()
            .map(|v| if v == 0.0 { 1.0 } else { v })
            .collect();
        let w: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
        let (n, m) = (self.n(), self.m());
        let (wx, wy, wz) = (&w[..n], &w[n..n + m], &w[n + m..]);

        let scaled = SaddleSystem {
            a: self.a.scale_rows_cols(wx, wx).expect("A weights"),
            b: self.b.scale_rows_cols(wy, wx).expect("B weights"),
            c: self.c.scale_rows_cols(wz, wy).expect("C weights"),
        };
        (scaled, ScalingRecord { d })
    }

    /// `b = 𝒜 · 1`, so the exact solution is the all-ones vector.
    pub fn rhs_for_ones(&self) -> Vec<f64> {
        let ones = vec![1.0; self.order()];
        let mut b = vec![0.0; self.order()];
        self.apply_into(&ones, &mut b);
        b
    }

    /// `‖b − 𝒜x‖₂ / ‖b‖₂`.
    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(x.len(), "residual x")?;
        self.check_len(b.len(), "residual b")?;
        let bnorm = crate::vector::norm(b);
        if bnorm == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let mut ax = vec![0.0; self.order()];
        self.apply_into(x, &mut ax);
        let r: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum();
        Ok(r.sqrt() / bnorm)
    }
}

/// Solution vector split into its three blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(sys: &SaddleSystem) -> Self {
        Self {
            x: vec![0.0; sys.n()],
            y: vec![0.0; sys.m()],
            z: vec![0.0; sys.l()],
        }
    }

    pub fn from_flat(sys: &SaddleSystem, flat: &[f64]) -> Result<Self> {
        sys.check_len(flat.len(), "block vector")?;
        let (n, m) = (sys.n(), sys.m());
        Ok(Self {
            x: flat[..n].to_vec(),
            y: flat[n..n + m].to_vec(),
            z: flat[n + m..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.x.len() + self.y.len() + self.z.len());
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.y);
        out.extend_from_slice(&self.z);
        out
    }

    pub fn matches(&self, sys: &SaddleSystem) -> bool {
        self.x.len() == sys.n() && self.y.len() == sys.m() && self.z.len() == sys.l()
    }
}

/// Diagonal of the scaling matrix `D` (column 2-norms, zero columns as 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub d: Vec<f64>,
}

impl ScalingRecord {
    /// Maps a solution of the scaled system back to the original unknowns,
    /// `x = D^{-1/2} x_scaled`.
    pub fn unscale_solution(&self, x_scaled: &[f64]) -> Vec<f64> {
        x_scaled
            .iter()
            .zip(&self.d)
            .map(|(x, d)| x / d.sqrt())
            .collect()
    }
}
