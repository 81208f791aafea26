//! Mahalanobis squared distances (MSD).
//!
//! The multivariate MSD of an observation is `(y - μ)ᵀ Σ⁻¹ (y - μ)`; the
//! matrix variate MSD is `tr(U⁻¹ (X - M) V⁻¹ (X - M)ᵀ)`. With `μ = vec(M)` and
//! `Σ = V ⊗ U` the two coincide exactly. Batched versions evaluate every
//! observation against parameters estimated from the same sample, with no
//! leave-one-out correction.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::{MatrixDataset, MatrixNormalParams, MvnParams};
use crate::error::{Error, Result};
use crate::estimation::{estimate_mvn, flip_flop_mle, DEFAULT_MAX_ITER};
use crate::linalg::{vec as vec_of, DenseMatrix};

/// One DD-plot point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePair {
    /// Multivariate MSD `D`.
    pub d_mvn: f64,
    /// Matrix variate MSD `D_M`.
    pub d_mat: f64,
}

/// `(y - μ)ᵀ Σ⁻¹ (y - μ)` through the Cholesky factor of `Σ`.
pub fn msd(y: &[f64], params: &MvnParams) -> Result<f64> {
    if y.len() != params.dim() {
        return Err(Error::ShapeMismatch {
            expected: (params.dim(), 1),
            found: (y.len(), 1),
        });
    }
    let d: Vec<f64> = y.iter().zip(params.mean().iter()).map(|(a, b)| a - b).collect();
    params.cov().quad_form(&d)
}

/// `tr(U⁻¹ (X - M) V⁻¹ (X - M)ᵀ) = ‖L_U⁻¹ (X - M) L_V⁻ᵀ‖²_F`.
pub fn msd_matrix(x: &DenseMatrix, params: &MatrixNormalParams) -> Result<f64> {
    if x.shape() != params.shape() {
        return Err(Error::ShapeMismatch {
            expected: params.shape(),
            found: x.shape(),
        });
    }
    let (r, c) = x.shape();
    // columns of X - M, stored contiguously, whitened by L_U
    let mut g = vec![0.0; r * c];
    for j in 0..c {
        for i in 0..r {
            g[j * r + i] = x[(i, j)] - params.mean()[(i, j)];
        }
    }
    for col in g.chunks_exact_mut(r) {
        params.row_scale().forward_solve_in_place(col);
    }
    // rows of the result, whitened by L_V
    let mut h = vec![0.0; c];
    let mut total = 0.0;
    for i in 0..r {
        for j in 0..c {
            h[j] = g[j * r + i];
        }
        params.col_scale().forward_solve_in_place(&mut h);
        total += h.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total)
}

fn require_beta_sample(data: &MatrixDataset) -> Result<()> {
    let p = data.rows() * data.cols();
    if data.len() < p + 2 {
        return Err(Error::SampleTooSmall { n: data.len(), required: p + 2 });
    }
    Ok(())
}

/// `D(X_i; μ̂, Σ̂)` for every observation, with `μ̂, Σ̂` the sample mean and
/// unbiased covariance of the same data. Needs `N ≥ rc + 2`.
pub fn mvn_distances(data: &MatrixDataset) -> Result<Vec<f64>> {
    require_beta_sample(data)?;
    let est = estimate_mvn(data)?;
    mvn_distances_with(data, &est.params)
}

pub fn mvn_distances_with(data: &MatrixDataset, params: &MvnParams) -> Result<Vec<f64>> {
    data.iter().map(|x| msd(&vec_of(x), params)).collect()
}

/// `D_M(X_i; M̂, Û, V̂)` for every observation, at the flip-flop MLE.
pub fn matnorm_distances(data: &MatrixDataset, flip_flop_tol: f64) -> Result<Vec<f64>> {
    let report = flip_flop_mle(data, flip_flop_tol, DEFAULT_MAX_ITER)?;
    matnorm_distances_with(data, &report.params)
}

pub fn matnorm_distances_with(data: &MatrixDataset, params: &MatrixNormalParams) -> Result<Vec<f64>> {
    data.iter().map(|x| msd_matrix(x, params)).collect()
}

/// `d · N / (N - 1)²`, which is `Beta(rc/2, (N - rc - 1)/2)` distributed for
/// the estimated multivariate MSD.
pub fn scale_for_beta(d: f64, n: usize) -> f64 {
    debug_assert!(n >= 2);
    let nf = n as f64;
    d * nf / ((nf - 1.0) * (nf - 1.0))
}
