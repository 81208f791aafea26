//! Parameter estimation: unstructured sample moments of `vec(X)` and the
//! flip-flop maximum likelihood estimator of the matrix normal.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::{MatrixDataset, MatrixNormalParams, MvnParams};
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, DenseMatrix, RealVector, SpdMatrix};
use crate::math::LN_2PI;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Sample mean and unbiased (divisor `N - 1`) covariance of `vec(X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnEstimate {
    pub params: MvnParams,
}

/// Outcome of [`flip_flop_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlipFlopReport {
    /// `M̂`, `Û`, `V̂` with `tr(Û) = r`.
    pub params: MatrixNormalParams,
    /// Completed `Û`/`V̂` update pairs.
    pub iterations: usize,
    pub final_loglik: f64,
    /// Absolute change of the log-likelihood over the last iteration.
    pub loglik_delta: f64,
    /// Factor applied to `Û` (and its inverse to `V̂`) by [`normalize_scale`].
    pub normalization_kappa: f64,
    pub converged: bool,
    /// Log-likelihood after each iteration.
    pub loglik_trace: Vec<f64>,
}

/// Lower-triangle accumulation of `Σ x xᵀ`, mirrored at the end. Keeps the
/// result exactly symmetric.
struct SymAccumulator {
    dim: usize,
    data: Vec<f64>,
}

impl SymAccumulator {
    fn new(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    /// Adds `v·vᵀ`.
    fn add_outer(&mut self, v: &[f64]) {
        let n = self.dim;
        for i in 0..n {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * n..i * n + i + 1];
            for (o, &vj) in row.iter_mut().zip(&v[..=i]) {
                *o += vi * vj;
            }
        }
    }

    /// Adds the Gram matrix `A·Aᵀ` of the rows of `a` (`dim` rows).
    fn add_row_gram(&mut self, a: &[f64], row_len: usize) {
        let n = self.dim;
        for i in 0..n {
            let ai = &a[i * row_len..(i + 1) * row_len];
            for j in 0..=i {
                let aj = &a[j * row_len..(j + 1) * row_len];
                self.data[i * n + j] += ai.iter().zip(aj).map(|(x, y)| x * y).sum::<f64>();
            }
        }
    }

    fn finish(mut self, divisor: f64) -> Result<DenseMatrix> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..=i {
                let v = self.data[i * n + j] / divisor;
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
        DenseMatrix::new(n, n, self.data)
    }
}

/// `μ̂ = mean of vec(X_i)`, `Σ̂ = Σ (vec X_i - μ̂)(vec X_i - μ̂)ᵀ / (N - 1)`.
///
/// Needs `N ≥ rc + 1` so that `Σ̂` can be of full rank.
pub fn estimate_mvn(data: &MatrixDataset) -> Result<MvnEstimate> {
    let (r, c) = data.shape();
    let p = r * c;
    let n = data.len();
    if n < p + 1 || n < 2 {
        return Err(Error::SampleTooSmall { n, required: (p + 1).max(2) });
    }
    let vecs = data.vecs();
    let nf = n as f64;
    let mut mean = vec![0.0; p];
    for v in &vecs {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut acc = SymAccumulator::new(p);
    let mut d = vec![0.0; p];
    for v in &vecs {
        for ((di, x), m) in d.iter_mut().zip(v.iter()).zip(&mean) {
            *di = x - m;
        }
        acc.add_outer(&d);
    }
    let cov = acc.finish(nf - 1.0)?;
    let cov = SpdMatrix::new(cov).map_err(|_| Error::SingularCovariance)?;
    Ok(MvnEstimate {
        params: MvnParams::new(RealVector::new(mean)?, cov)?,
    })
}

/// Rescales so that `tr(U') = r`: `κ = r / tr(U)`, `U' = κU`, `V' = V/κ`.
pub fn normalize_scale(u: &SpdMatrix, v: &SpdMatrix) -> (SpdMatrix, SpdMatrix, f64) {
    let kappa = u.dim() as f64 / u.trace();
    if kappa == 1.0 {
        return (u.clone(), v.clone(), 1.0);
    }
    (u.scaled(kappa), v.scaled(1.0 / kappa), kappa)
}

/// Centered observations in both orientations, so every half-step works on
/// contiguous rows.
struct Centered {
    rows: usize,
    cols: usize,
    /// `X_i - M̂`, row-major r×c.
    e: Vec<Vec<f64>>,
    /// `(X_i - M̂)ᵀ`, row-major c×r.
    et: Vec<Vec<f64>>,
}

impl Centered {
    fn new(data: &MatrixDataset, mean: &DenseMatrix) -> Result<Self> {
        let mut e = Vec::with_capacity(data.len());
        let mut et = Vec::with_capacity(data.len());
        for x in data.iter() {
            let d = x.sub(mean)?;
            et.push(d.transpose().into_vec());
            e.push(d.into_vec());
        }
        Ok(Self { rows: data.rows(), cols: data.cols(), e, et })
    }

    fn n(&self) -> usize {
        self.e.len()
    }
}

/// `Σ_i A_i S⁻¹ A_iᵀ / divisor` where `A_i` are `k × m` blocks and `S` is
/// `m × m`. Each row of `A_i` is whitened by `L_S⁻¹`, then the Gram matrix of
/// the whitened rows is accumulated.
fn whitened_scatter(blocks: &[Vec<f64>], k: usize, s: &SpdMatrix, divisor: f64) -> Result<DenseMatrix> {
    let m = s.dim();
    let mut acc = SymAccumulator::new(k);
    let mut w = vec![0.0; k * m];
    for a in blocks {
        w.copy_from_slice(a);
        for row in w.chunks_exact_mut(m) {
            s.forward_solve_in_place(row);
        }
        acc.add_row_gram(&w, m);
    }
    acc.finish(divisor)
}

/// `Σ_i ‖L_U⁻¹ E_i L_V⁻ᵀ‖²_F`, the sum of matrix variate distances.
fn total_distance(centered: &Centered, u: &SpdMatrix, v: &SpdMatrix) -> f64 {
    let (r, c) = (centered.rows, centered.cols);
    let mut g = vec![0.0; c * r];
    let mut h = vec![0.0; r * c];
    let mut total = 0.0;
    for et in &centered.et {
        // columns of E, whitened by L_U
        g.copy_from_slice(et);
        for col in g.chunks_exact_mut(r) {
            u.forward_solve_in_place(col);
        }
        // transpose back to rows and whiten by L_V
        for i in 0..r {
            for j in 0..c {
                h[i * c + j] = g[j * r + i];
            }
        }
        for row in h.chunks_exact_mut(c) {
            v.forward_solve_in_place(row);
        }
        total += h.iter().map(|x| x * x).sum::<f64>();
    }
    total
}

fn log_likelihood(centered: &Centered, u: &SpdMatrix, v: &SpdMatrix) -> f64 {
    let n = centered.n() as f64;
    let (r, c) = (centered.rows as f64, centered.cols as f64);
    -0.5 * n * r * c * LN_2PI
        - 0.5 * n * r * logdet_spd(v)
        - 0.5 * n * c * logdet_spd(u)
        - 0.5 * total_distance(centered, u, v)
}

fn sample_mean(data: &MatrixDataset) -> DenseMatrix {
    let (r, c) = data.shape();
    let n = data.len() as f64;
    let mut acc = vec![0.0; r * c];
    for x in data.iter() {
        for (a, v) in acc.iter_mut().zip(x.as_slice()) {
            *a += v;
        }
    }
    DenseMatrix::from_fn(r, c, |i, j| acc[i * c + j] / n)
}

/// Flip-flop maximum likelihood estimation starting from `V̂₀ = I`.
///
/// `M̂` is the sample mean. Then `Û = Σ (X_i - M̂) V̂⁻¹ (X_i - M̂)ᵀ / (cN)` and
/// `V̂ = Σ (X_i - M̂)ᵀ Û⁻¹ (X_i - M̂) / (rN)` are alternated, in that order,
/// until the total log-likelihood changes by less than `tol`. The result is
/// normalised to `tr(Û) = r` once at the end.
pub fn flip_flop_mle(data: &MatrixDataset, tol: f64, max_iter: usize) -> Result<FlipFlopReport> {
    flip_flop_mle_from(data, tol, max_iter, &SpdMatrix::identity(data.cols()))
}

/// [`flip_flop_mle`] from a caller-supplied starting `V̂₀`.
pub fn flip_flop_mle_from(
    data: &MatrixDataset,
    tol: f64,
    max_iter: usize,
    initial_col_scale: &SpdMatrix,
) -> Result<FlipFlopReport> {
    let (r, c) = data.shape();
    let n = data.len();
    let required = 2.max(r / c + 1).max(c / r + 1);
    if n < required {
        return Err(Error::SampleTooSmall { n, required });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::DomainError("tolerance must be positive and finite"));
    }
    if max_iter == 0 {
        return Err(Error::DomainError("max_iter must be at least 1"));
    }
    if initial_col_scale.dim() != c {
        return Err(Error::ShapeMismatch {
            expected: (c, c),
            found: (initial_col_scale.dim(), initial_col_scale.dim()),
        });
    }

    let mean = sample_mean(data);
    let centered = Centered::new(data, &mean)?;
    let nf = n as f64;

    let mut v = initial_col_scale.clone();
    let mut u;
    let mut trace = Vec::new();
    let mut delta = f64::INFINITY;
    let mut converged = false;
    loop {
        let u_mat = whitened_scatter(&centered.e, r, &v, c as f64 * nf)?;
        u = SpdMatrix::new(u_mat).map_err(|_| Error::SingularUpdate)?;
        let v_mat = whitened_scatter(&centered.et, c, &u, r as f64 * nf)?;
        v = SpdMatrix::new(v_mat).map_err(|_| Error::SingularUpdate)?;

        let ll = log_likelihood(&centered, &u, &v);
        if !ll.is_finite() {
            return Err(Error::SingularUpdate);
        }
        if let Some(&prev) = trace.last() {
            delta = ll - prev;
        }
        trace.push(ll);
        if delta.abs() < tol {
            converged = true;
            break;
        }
        if trace.len() >= max_iter {
            break;
        }
    }

    let (u, v, kappa) = normalize_scale(&u, &v);
    let report = FlipFlopReport {
        params: MatrixNormalParams::new(mean, u, v)?,
        iterations: trace.len(),
        final_loglik: *trace.last().expect("at least one iteration"),
        loglik_delta: if delta.is_finite() { delta.abs() } else { f64::INFINITY },
        normalization_kappa: kappa,
        converged,
        loglik_trace: trace,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::MaxIterationsExceeded(alloc::boxed::Box::new(report)))
    }
}
