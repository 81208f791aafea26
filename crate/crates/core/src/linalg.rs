//! Dense real matrix and vector kernels.
//!
//! Matrices are stored row-major. [`vec`] stacks columns, so that a matrix
//! normal `X ~ N(M, V, U)` satisfies `vec(X) ~ N(vec(M), V ⊗ U)` with the
//! Kronecker factors in that order.
//!
//! Inverses of SPD matrices are never formed: quadratic forms and solves go
//! through the Cholesky factor held by [`SpdMatrix`].

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance for the symmetry check of [`SpdMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative floor on Cholesky pivots, scaled by the largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("zero dimension"));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix("entry count does not match shape"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(Error::InvalidMatrix("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(n, m, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "zero dimension");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(n, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.cols, rhs.cols),
                found: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<RealVector> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: (self.cols, 1),
                found: (v.len(), 1),
            });
        }
        let out = (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        Ok(RealVector(out))
    }

    fn zip_with(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: rhs.shape(),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A[i][j] - A[j][i]|`; square matrices only.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMatrix("empty vector"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.0.iter().map(|v| v * v).sum())
    }
}

impl AsRef<[f64]> for RealVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Column-stacks `x`: `out[j * rows + i] = x[i][j]`.
pub fn vec(x: &DenseMatrix) -> RealVector {
    let (r, c) = x.shape();
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(x[(i, j)]);
        }
    }
    RealVector(out)
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 || v.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: (rows * cols, 1),
            found: (v.len(), 1),
        });
    }
    let m = DenseMatrix::from_fn(rows, cols, |i, j| v[j * rows + i]);
    DenseMatrix::new(rows, cols, m.data)
}

/// Kronecker product; block `(i, j)` of the result is `a[i][j] * b`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (p, q) = b.shape();
    DenseMatrix::from_fn(a.rows * p, a.cols * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// Lower Cholesky factor of a symmetric matrix. Only the lower triangle of
/// `s` is read.
pub fn cholesky(s: &DenseMatrix) -> Result<DenseMatrix> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (s.rows, s.rows),
            found: s.shape(),
        });
    }
    let n = s.rows;
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(s[(i, i)]));
    let floor = PIVOT_TOL * max_diag;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = &l.data[j * n..j * n + j];
        let pivot = s[(j, j)] - lj.iter().map(|v| v * v).sum::<f64>();
        if !(pivot > floor) || max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = math::sqrt(pivot);
        l.data[j * n + j] = d;
        for i in j + 1..n {
            let (head, tail) = l.data.split_at_mut(i * n);
            let lj = &head[j * n..j * n + j];
            let li = &tail[..j];
            let dot: f64 = li.iter().zip(lj).map(|(a, b)| a * b).sum();
            tail[j] = (s[(i, j)] - dot) / d;
        }
    }
    Ok(l)
}

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DenseMatrix,
    chol: DenseMatrix,
}

impl SpdMatrix {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch {
                expected: (matrix.rows, matrix.rows),
                found: matrix.shape(),
            });
        }
        let asym = matrix.max_asymmetry();
        if asym > SYMMETRY_TOL * (1.0 + matrix.max_abs()) {
            return Err(Error::NotSymmetric(asym));
        }
        let chol = cholesky(&matrix)?;
        Ok(Self { matrix, chol })
    }

    pub fn identity(n: usize) -> Self {
        let m = DenseMatrix::identity(n);
        Self { chol: m.clone(), matrix: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Lower-triangular `L` with `S = L·Lᵀ`.
    pub fn chol(&self) -> &DenseMatrix {
        &self.chol
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn logdet(&self) -> f64 {
        logdet_spd(self)
    }

    /// `k · S` for `k > 0`, rescaling the factor instead of refactorising.
    pub fn scaled(&self, k: f64) -> Self {
        debug_assert!(k > 0.0);
        Self {
            matrix: self.matrix.scale(k),
            chol: self.chol.scale(math::sqrt(k)),
        }
    }

    /// Solves `L·z = b` in place.
    pub fn forward_solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let l = &self.chol.data;
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let dot: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - dot) / l[i * n + i];
        }
    }

    /// Solves `Lᵀ·x = b` in place.
    pub fn backward_solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let l = &self.chol.data;
        for i in (0..n).rev() {
            let mut acc = b[i];
            for k in i + 1..n {
                acc -= l[k * n + i] * b[k];
            }
            b[i] = acc / l[i * n + i];
        }
    }

    /// `dᵀ S⁻¹ d`, computed as `‖L⁻¹ d‖²`.
    pub fn quad_form(&self, d: &[f64]) -> Result<f64> {
        if d.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: (self.dim(), 1),
                found: (d.len(), 1),
            });
        }
        let mut z = d.to_vec();
        self.forward_solve_in_place(&mut z);
        Ok(z.iter().map(|v| v * v).sum())
    }
}

/// Solves `S·x = b` with two triangular solves.
pub fn spd_solve(s: &SpdMatrix, b: &[f64]) -> Result<RealVector> {
    if b.len() != s.dim() {
        return Err(Error::ShapeMismatch {
            expected: (s.dim(), 1),
            found: (b.len(), 1),
        });
    }
    let mut x = b.to_vec();
    s.forward_solve_in_place(&mut x);
    s.backward_solve_in_place(&mut x);
    Ok(RealVector(x))
}

pub fn logdet_spd(s: &SpdMatrix) -> f64 {
    2.0 * (0..s.dim()).map(|i| math::ln(s.chol[(i, i)])).sum::<f64>()
}
