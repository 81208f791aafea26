//! Random parameters, simulated datasets with and without Kronecker
//! structure, and Monte-Carlo rejection-rate sweeps.
//!
//! Every replicate of a sweep draws its data from
//! `cfg.master_seed.split(dim_index, N, replicate)`, so results do not depend
//! on execution order. [`sweep`] runs sequentially; the `matvar` crate runs
//! the same grid in parallel through [`SweepConfig::cells`] and
//! [`run_replicate`].

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{
    sample_matrix_normal, sample_mvn, standard_normal_matrix, MatrixDataset, MatrixNormalParams,
    MvnParams,
};
use crate::error::{Error, Result};
use crate::estimation::DEFAULT_TOL;
use crate::kstest::matrix_normality_test;
use crate::linalg::{DenseMatrix, RealVector, SpdMatrix};
use crate::rng::Seed;

/// Ridge coefficient: `random_spd(dim)` adds `dim · RIDGE · I`.
pub const RIDGE: f64 = 0.1;

/// `A·Aᵀ + dim·0.1·I` with `A` a `dim × dim` matrix of iid standard normals.
pub fn random_spd(dim: usize, seed: Seed) -> SpdMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = seed.generator();
    let a = standard_normal_matrix(&mut rng, dim, dim);
    let ridge = dim as f64 * RIDGE;
    let mut s = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = a.row(i).iter().zip(a.row(j)).map(|(x, y)| x * y).sum();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
        s[(i, i)] += ridge;
    }
    SpdMatrix::new(s).expect("A·Aᵀ plus a positive ridge is positive definite")
}

/// Mean with iid standard normal entries; `U = random_spd(r)`,
/// `V = random_spd(c)`. Sub-seeds 0, 1, 2 of `seed`.
pub fn random_matnorm_params(r: usize, c: usize, seed: Seed) -> MatrixNormalParams {
    let mean = standard_normal_matrix(&mut seed.derive(0).generator(), r, c);
    MatrixNormalParams::new(mean, random_spd(r, seed.derive(1)), random_spd(c, seed.derive(2)))
        .expect("shapes agree by construction")
}

/// Matrix normal data with random parameters. Parameters come from sub-seed
/// 0 of `seed` and the observations from sub-seed 1, so
/// `sample_matrix_normal(&params, n, seed.derive(1))` reproduces the data.
pub fn gen_matnorm_dataset(n: usize, r: usize, c: usize, seed: Seed) -> Result<(MatrixDataset, MatrixNormalParams)> {
    if r == 0 || c == 0 {
        return Err(Error::InvalidMatrix("zero dimension"));
    }
    let params = random_matnorm_params(r, c, seed.derive(0));
    let data = sample_matrix_normal(&params, n, seed.derive(1))?;
    Ok((data, params))
}

/// Multivariate normal data on `p = r·c` coordinates with an unstructured
/// covariance `random_spd(p)`, reshaped to `r × c` by inverting `vec`.
pub fn gen_nonkron_dataset(n: usize, r: usize, c: usize, seed: Seed) -> Result<(MatrixDataset, MvnParams)> {
    if r == 0 || c == 0 {
        return Err(Error::InvalidMatrix("zero dimension"));
    }
    let p = r * c;
    let mut rng = seed.derive(0).generator();
    let mean: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let params = MvnParams::new(RealVector::new(mean)?, random_spd(p, seed.derive(1)))?;
    let ys = sample_mvn(&params, n, seed.derive(2))?;
    Ok((MatrixDataset::from_vecs(&ys, r, c)?, params))
}

/// Which data-generating process a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// Matrix normal data: rejections are Type 1 errors.
    MatrixNormal,
    /// Unstructured multivariate normal data: rejections measure power.
    NonKronecker,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dims: Vec<(usize, usize)>,
    pub n_start: usize,
    pub n_end: usize,
    pub n_step: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub master_seed: Seed,
    pub flip_flop_tol: f64,
}

/// One `(dimension, N)` cell of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCell {
    pub dim_index: usize,
    pub r: usize,
    pub c: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: usize,
    pub c: usize,
    pub n: usize,
    pub replicates: usize,
    pub rejections: usize,
    /// Replicates whose estimation failed; they count as non-rejections.
    pub failures: usize,
    /// `rejections / replicates`.
    pub rejection_rate: f64,
}

impl SweepConfig {
    /// `replicates = 500`, `n_step = 5`, `alpha = 0.05`.
    pub fn new(dims: Vec<(usize, usize)>, n_start: usize, n_end: usize, master_seed: Seed) -> Self {
        Self {
            dims,
            n_start,
            n_end,
            n_step: 5,
            alpha: 0.05,
            replicates: 500,
            master_seed,
            flip_flop_tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::DomainError("no dimensions in sweep"));
        }
        if self.dims.iter().any(|&(r, c)| r == 0 || c == 0) {
            return Err(Error::InvalidMatrix("zero dimension"));
        }
        let max_p = self.dims.iter().map(|&(r, c)| r * c).max().unwrap_or(0);
        if self.n_start < max_p + 2 {
            return Err(Error::SampleTooSmall { n: self.n_start, required: max_p + 2 });
        }
        if self.n_step == 0 {
            return Err(Error::DomainError("n_step must be at least 1"));
        }
        if self.n_end < self.n_start {
            return Err(Error::DomainError("n_end is below n_start"));
        }
        if self.replicates == 0 {
            return Err(Error::DomainError("replicates must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::DomainError("alpha must lie in (0, 1)"));
        }
        if !(self.flip_flop_tol > 0.0) {
            return Err(Error::DomainError("tolerance must be positive"));
        }
        Ok(())
    }

    pub fn sample_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        (self.n_start..=self.n_end).step_by(self.n_step.max(1))
    }

    /// Grid cells in output order: dimensions outer, `N` inner.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for (dim_index, &(r, c)) in self.dims.iter().enumerate() {
            for n in self.sample_sizes() {
                out.push(SweepCell { dim_index, r, c, n });
            }
        }
        out
    }

    pub fn replicate_seed(&self, cell: &SweepCell, replicate: usize) -> Seed {
        self.master_seed.split(cell.dim_index as u64, cell.n as u64, replicate as u64)
    }
}

/// Generates one dataset and tests it; `Ok(true)` means the test rejected.
pub fn run_replicate(kind: DataKind, cell: &SweepCell, cfg: &SweepConfig, replicate: usize) -> Result<bool> {
    let seed = cfg.replicate_seed(cell, replicate);
    let data = match kind {
        DataKind::MatrixNormal => gen_matnorm_dataset(cell.n, cell.r, cell.c, seed)?.0,
        DataKind::NonKronecker => gen_nonkron_dataset(cell.n, cell.r, cell.c, seed)?.0,
    };
    Ok(matrix_normality_test(&data, cfg.alpha, cfg.flip_flop_tol)?.ks.reject)
}

impl SweepRow {
    pub fn from_counts(cell: &SweepCell, replicates: usize, rejections: usize, failures: usize) -> Self {
        Self {
            r: cell.r,
            c: cell.c,
            n: cell.n,
            replicates,
            rejections,
            failures,
            rejection_rate: rejections as f64 / replicates as f64,
        }
    }
}

/// Runs every replicate of every cell sequentially.
pub fn sweep(kind: DataKind, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    Ok(cfg
        .cells()
        .iter()
        .map(|cell| {
            let (mut rejections, mut failures) = (0, 0);
            for k in 0..cfg.replicates {
                match run_replicate(kind, cell, cfg, k) {
                    Ok(true) => rejections += 1,
                    Ok(false) => {}
                    Err(_) => failures += 1,
                }
            }
            SweepRow::from_counts(cell, cfg.replicates, rejections, failures)
        })
        .collect())
}

/// Type 1 error sweep on matrix normal data.
pub fn type1_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    sweep(DataKind::MatrixNormal, cfg)
}

/// Power sweep on unstructured multivariate normal data.
pub fn power_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    sweep(DataKind::NonKronecker, cfg)
}

pub const SWEEP_CSV_HEADER: &str = "r,c,N,replicates,rejections,rejection_rate";

/// Sweep rows as CSV with header `r,c,N,replicates,rejections,rejection_rate`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.16e}",
            row.r, row.c, row.n, row.replicates, row.rejections, row.rejection_rate
        );
    }
    out
}
