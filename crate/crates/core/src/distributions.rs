//! Matrix normal and multivariate normal laws: parameters, log-densities and
//! samplers, plus the Beta parameters of the estimated-distance null law.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distances;
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, DenseMatrix, RealVector, SpdMatrix};
use crate::math::LN_2PI;
pub use crate::rng::Seed;
pub use crate::special::{beta_cdf, chi2_cdf};

/// Mean `M` (r×c), row scale `U` (r×r) and column scale `V` (c×c).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixNormalParams {
    mean: DenseMatrix,
    row_scale: SpdMatrix,
    col_scale: SpdMatrix,
}

impl MatrixNormalParams {
    pub fn new(mean: DenseMatrix, row_scale: SpdMatrix, col_scale: SpdMatrix) -> Result<Self> {
        if mean.rows() != row_scale.dim() || mean.cols() != col_scale.dim() {
            return Err(Error::ShapeMismatch {
                expected: (row_scale.dim(), col_scale.dim()),
                found: mean.shape(),
            });
        }
        Ok(Self { mean, row_scale, col_scale })
    }

    pub fn mean(&self) -> &DenseMatrix {
        &self.mean
    }

    /// `U`.
    pub fn row_scale(&self) -> &SpdMatrix {
        &self.row_scale
    }

    /// `V`.
    pub fn col_scale(&self) -> &SpdMatrix {
        &self.col_scale
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mean.shape()
    }

    /// `V ⊗ U`, the covariance of `vec(X)`.
    pub fn kron_covariance(&self) -> DenseMatrix {
        crate::linalg::kron(self.col_scale.matrix(), self.row_scale.matrix())
    }

    /// The equivalent multivariate normal on `vec(X)`.
    pub fn to_mvn(&self) -> Result<MvnParams> {
        MvnParams::new(
            crate::linalg::vec(&self.mean),
            SpdMatrix::new(self.kron_covariance())?,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvnParams {
    mean: RealVector,
    cov: SpdMatrix,
}

impl MvnParams {
    pub fn new(mean: RealVector, cov: SpdMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::ShapeMismatch {
                expected: (cov.dim(), 1),
                found: (mean.len(), 1),
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> &RealVector {
        &self.mean
    }

    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }
}

/// `N ≥ 1` observed matrices sharing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDataset {
    rows: usize,
    cols: usize,
    observations: Vec<DenseMatrix>,
}

impl MatrixDataset {
    pub fn new(observations: Vec<DenseMatrix>) -> Result<Self> {
        let first = observations.first().ok_or(Error::EmptySample)?;
        let (rows, cols) = first.shape();
        if let Some(bad) = observations.iter().find(|x| x.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: bad.shape(),
            });
        }
        Ok(Self { rows, cols, observations })
    }

    /// Rebuilds matrices from column-major vectors (the inverse of `vec`).
    pub fn from_vecs<V: AsRef<[f64]>>(vecs: &[V], rows: usize, cols: usize) -> Result<Self> {
        let obs = vecs
            .iter()
            .map(|v| crate::linalg::unvec(v.as_ref(), rows, cols))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of observations `N`.
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[DenseMatrix] {
        &self.observations
    }

    pub fn iter(&self) -> core::slice::Iter<'_, DenseMatrix> {
        self.observations.iter()
    }

    pub fn into_observations(self) -> Vec<DenseMatrix> {
        self.observations
    }

    pub fn vecs(&self) -> Vec<RealVector> {
        self.observations.iter().map(crate::linalg::vec).collect()
    }

    /// Adds `c` to every observation.
    pub fn shifted(&self, c: &DenseMatrix) -> Result<Self> {
        let obs = self
            .observations
            .iter()
            .map(|x| x.add(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }
}

fn check_shape(x: &DenseMatrix, params: &MatrixNormalParams) -> Result<()> {
    if x.shape() != params.shape() {
        return Err(Error::ShapeMismatch {
            expected: params.shape(),
            found: x.shape(),
        });
    }
    Ok(())
}

/// Matrix normal log-density
/// `-(rc/2) log 2π - (r/2) log|V| - (c/2) log|U| - ½ tr(V⁻¹(X-M)ᵀU⁻¹(X-M))`.
pub fn matnorm_logpdf(x: &DenseMatrix, params: &MatrixNormalParams) -> Result<f64> {
    check_shape(x, params)?;
    let (r, c) = params.shape();
    let (r, c) = (r as f64, c as f64);
    let quad = distances::msd_matrix(x, params)?;
    Ok(-0.5 * r * c * LN_2PI
        - 0.5 * r * logdet_spd(params.col_scale())
        - 0.5 * c * logdet_spd(params.row_scale())
        - 0.5 * quad)
}

pub fn mvn_logpdf(y: &[f64], params: &MvnParams) -> Result<f64> {
    let p = params.dim() as f64;
    let quad = distances::msd(y, params)?;
    Ok(-0.5 * p * LN_2PI - 0.5 * logdet_spd(params.cov()) - 0.5 * quad)
}

pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Draws `n` matrices as `M + L_U · Z · L_Vᵀ` where `Z` has iid standard
/// normal entries drawn in row-major order.
pub fn sample_matrix_normal(params: &MatrixNormalParams, n: usize, seed: Seed) -> Result<MatrixDataset> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = seed.generator();
    let (r, c) = params.shape();
    let lu = params.row_scale().chol();
    let lvt = params.col_scale().chol().transpose();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z = standard_normal_matrix(&mut rng, r, c);
        let x = lu.matmul(&z)?.matmul(&lvt)?.add(params.mean())?;
        out.push(x);
    }
    MatrixDataset::new(out)
}

/// Draws `n` vectors as `μ + L_Σ · z`.
pub fn sample_mvn(params: &MvnParams, n: usize, seed: Seed) -> Result<Vec<RealVector>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = seed.generator();
    let p = params.dim();
    let l = params.cov().chol();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let mut y = l.mat_vec(&z)?.into_vec();
        for (v, m) in y.iter_mut().zip(params.mean().iter()) {
            *v += m;
        }
        out.push(RealVector::new(y)?);
    }
    Ok(out)
}

/// Beta law of the scaled estimated distance: `N/(N-1)² · D ~ Beta(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullBeta {
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl NullBeta {
    /// CDF of the unscaled distance `D`.
    pub fn distance_cdf(&self, d: f64) -> f64 {
        beta_cdf(d * self.scale, self.a, self.b).unwrap_or(f64::NAN)
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

/// `a = rc/2`, `b = (N - rc - 1)/2`, `scale = N/(N-1)²`.
pub fn null_beta_params(n: usize, r: usize, c: usize) -> Result<NullBeta> {
    let p = r * c;
    if n <= p + 1 {
        return Err(Error::SampleTooSmall { n, required: p + 2 });
    }
    let nf = n as f64;
    Ok(NullBeta {
        a: p as f64 / 2.0,
        b: (n - p - 1) as f64 / 2.0,
        scale: nf / ((nf - 1.0) * (nf - 1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, vec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spd(rows: &[&[f64]]) -> SpdMatrix {
        SpdMatrix::new(DenseMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn params_2x3() -> MatrixNormalParams {
        MatrixNormalParams::new(
            DenseMatrix::from_rows(&[[0.5, -1.0, 2.0], [0.0, 1.5, -0.3]]).unwrap(),
            spd(&[&[2.0, 0.4], &[0.4, 1.0]]),
            spd(&[&[1.0, 0.2, 0.1], &[0.2, 3.0, -0.5], &[0.1, -0.5, 1.5]]),
        )
        .unwrap()
    }

    #[test]
    fn logpdf_scalar_standard_normal() {
        let p = MatrixNormalParams::new(
            DenseMatrix::zeros(1, 1),
            SpdMatrix::identity(1),
            SpdMatrix::identity(1),
        )
        .unwrap();
        let v = matnorm_logpdf(&DenseMatrix::zeros(1, 1), &p).unwrap();
        assert_relative_eq!(v, -0.5 * LN_2PI, epsilon = 1e-15);

        let mp = MvnParams::new(RealVector::zeros(1), SpdMatrix::identity(1)).unwrap();
        assert_relative_eq!(mvn_logpdf(&[0.0], &mp).unwrap(), -0.5 * LN_2PI, epsilon = 1e-15);
    }

    #[test]
    fn logpdf_at_mean_drops_trace_term() {
        let p = params_2x3();
        let v = matnorm_logpdf(p.mean(), &p).unwrap();
        let want = -3.0 * LN_2PI - 1.0 * p.col_scale().logdet() - 1.5 * p.row_scale().logdet();
        assert_relative_eq!(v, want, epsilon = 1e-12);

        let mp = p.to_mvn().unwrap();
        let want = -3.0 * LN_2PI - 0.5 * mp.cov().logdet();
        assert_relative_eq!(mvn_logpdf(mp.mean(), &mp).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn mvn_logpdf_quadratic_25() {
        let mp = MvnParams::new(RealVector::zeros(2), SpdMatrix::identity(2)).unwrap();
        let v = mvn_logpdf(&[3.0, 4.0], &mp).unwrap();
        assert_relative_eq!(v, -LN_2PI - 12.5, epsilon = 1e-13);
    }

    #[test]
    fn logpdf_shape_mismatch() {
        let p = params_2x3();
        assert!(matches!(
            matnorm_logpdf(&DenseMatrix::zeros(3, 2), &p),
            Err(Error::ShapeMismatch { .. })
        ));
        let mp = p.to_mvn().unwrap();
        assert!(matches!(mvn_logpdf(&[1.0], &mp), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn params_shape_checked() {
        let r = MatrixNormalParams::new(
            DenseMatrix::zeros(2, 2),
            SpdMatrix::identity(3),
            SpdMatrix::identity(2),
        );
        assert!(r.is_err());
        assert!(MatrixDataset::new(Vec::new()).is_err());
        let mixed = alloc::vec![DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 3)];
        assert!(MatrixDataset::new(mixed).is_err());
    }

    #[test]
    fn null_beta_parameters() {
        let nb = null_beta_params(100, 2, 2).unwrap();
        assert_eq!((nb.a, nb.b), (2.0, 47.5));
        assert_relative_eq!(nb.scale, 100.0 / 9801.0, epsilon = 1e-18);
        let nb = null_beta_params(1000, 2, 2).unwrap();
        assert_eq!((nb.a, nb.b), (2.0, 497.5));
        assert_relative_eq!(nb.scale, 1000.0 / 998_001.0, epsilon = 1e-18);
        let nb = null_beta_params(6, 2, 2).unwrap();
        assert_eq!((nb.a, nb.b, nb.scale), (2.0, 0.5, 6.0 / 25.0));
        assert_eq!(
            null_beta_params(5, 2, 2),
            Err(Error::SampleTooSmall { n: 5, required: 6 })
        );
    }

    #[test]
    fn samplers_are_deterministic_per_seed() {
        let p = params_2x3();
        let a = sample_matrix_normal(&p, 20, Seed(3)).unwrap();
        let b = sample_matrix_normal(&p, 20, Seed(3)).unwrap();
        let c = sample_matrix_normal(&p, 20, Seed(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);

        let mp = p.to_mvn().unwrap();
        assert_eq!(sample_mvn(&mp, 5, Seed(9)).unwrap(), sample_mvn(&mp, 5, Seed(9)).unwrap());
        assert_ne!(sample_mvn(&mp, 5, Seed(9)).unwrap(), sample_mvn(&mp, 5, Seed(10)).unwrap());
    }

    fn sample_moments(vs: &[RealVector]) -> (Vec<f64>, DenseMatrix) {
        let n = vs.len() as f64;
        let p = vs[0].len();
        let mut mean = alloc::vec![0.0; p];
        for v in vs {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x / n;
            }
        }
        let mut cov = DenseMatrix::zeros(p, p);
        for v in vs {
            for i in 0..p {
                for j in 0..p {
                    cov[(i, j)] += (v[i] - mean[i]) * (v[j] - mean[j]) / (n - 1.0);
                }
            }
        }
        (mean, cov)
    }

    #[test]
    fn matrix_normal_sample_moments() {
        let p = MatrixNormalParams::new(
            DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]).unwrap(),
            spd(&[&[2.0, 0.6], &[0.6, 1.0]]),
            spd(&[&[1.5, -0.4], &[-0.4, 0.8]]),
        )
        .unwrap();
        let n = 100_000;
        let data = sample_matrix_normal(&p, n, Seed(11)).unwrap();
        let (mean, cov) = sample_moments(&data.vecs());
        let sigma = p.kron_covariance();
        let mu = vec(p.mean());
        for k in 0..4 {
            let sd = sigma[(k, k)].sqrt();
            assert!((mean[k] - mu[k]).abs() <= 4.0 * sd / (n as f64).sqrt());
        }
        let rel = cov.sub(&sigma).unwrap().frobenius_norm() / sigma.frobenius_norm();
        assert!(rel <= 0.05, "relative error {rel}");
    }

    #[test]
    fn mvn_sample_moments() {
        let n = 100_000;
        let id = MvnParams::new(RealVector::zeros(2), SpdMatrix::identity(2)).unwrap();
        let (mean, _) = sample_moments(&sample_mvn(&id, n, Seed(5)).unwrap());
        for m in mean {
            assert!(m.abs() <= 4.0 / (n as f64).sqrt());
        }
        let sigma = spd(&[&[4.0, 2.0, 0.0], &[2.0, 3.0, 0.5], &[0.0, 0.5, 1.0]]);
        let mp = MvnParams::new(RealVector::new(alloc::vec![1.0, 2.0, 3.0]).unwrap(), sigma.clone()).unwrap();
        let (_, cov) = sample_moments(&sample_mvn(&mp, n, Seed(6)).unwrap());
        let rel = cov.sub(sigma.matrix()).unwrap().frobenius_norm() / sigma.matrix().frobenius_norm();
        assert!(rel <= 0.05, "relative error {rel}");
    }

    fn random_params(r: usize, c: usize, seed: u64) -> MatrixNormalParams {
        let s = Seed(seed);
        MatrixNormalParams::new(
            standard_normal_matrix(&mut s.derive(0).generator(), r, c),
            crate::simulation::random_spd(r, s.derive(1)),
            crate::simulation::random_spd(c, s.derive(2)),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn matnorm_logpdf_equals_vectorised(r in 1usize..=4, c in 1usize..=4, seed in any::<u64>()) {
            let p = random_params(r, c, seed);
            let x = standard_normal_matrix(&mut Seed(seed).derive(9).generator(), r, c);
            let lhs = matnorm_logpdf(&x, &p).unwrap();
            let mp = MvnParams::new(vec(p.mean()), SpdMatrix::new(kron(p.col_scale().matrix(), p.row_scale().matrix())).unwrap()).unwrap();
            let rhs = mvn_logpdf(&vec(&x), &mp).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn matnorm_logpdf_scale_invariant(r in 1usize..=4, c in 1usize..=4, seed in any::<u64>(), kappa in 0.01f64..100.0) {
            let p = random_params(r, c, seed);
            let x = standard_normal_matrix(&mut Seed(seed).derive(9).generator(), r, c);
            let q = MatrixNormalParams::new(
                p.mean().clone(),
                p.row_scale().scaled(1.0 / kappa),
                p.col_scale().scaled(kappa),
            ).unwrap();
            let a = matnorm_logpdf(&x, &p).unwrap();
            let b = matnorm_logpdf(&x, &q).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }
}
