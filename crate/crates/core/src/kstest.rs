//! Empirical CDFs, Kolmogorov–Smirnov statistics and the matrix normality
//! test built on them.
//!
//! Both statistics are computed exactly: the supremum of a difference of step
//! functions is attained at a sample point, so the one-sample statistic scans
//! order statistics and the two-sample statistic merges the sorted samples.

use alloc::vec::Vec;

use crate::distances::{matnorm_distances_with, mvn_distances_with, DistancePair};
use crate::distributions::MatrixDataset;
use crate::error::{Error, Result};
use crate::estimation::{estimate_mvn, flip_flop_mle, FlipFlopReport, MvnEstimate, DEFAULT_MAX_ITER};
use crate::math;

fn sorted_copy(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::DomainError("sample contains NaN"));
    }
    let mut s = sample.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    Ok(s)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        Ok(Self { sorted: sorted_copy(sample)? })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_sample(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }
}

/// `sup_x |F_N(x) - F(x)|` for a continuous reference CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let s = sorted_copy(sample)?;
    let n = s.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        stat = stat.max(above).max(below);
    }
    Ok(stat)
}

/// `sup_x |F_a(x) - F_b(x)|` by a merge scan over the pooled sorted values.
///
/// Ties inside and across the samples are consumed together, so the
/// difference is read off right-continuous values at every distinct pooled
/// point; left limits are the values at the previous distinct point.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_copy(a)?;
    let b = sorted_copy(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        stat = stat.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(stat)
}

/// Rejection threshold `sqrt(-½ log(α) · (N_a + N_b) / (N_a N_b))`.
pub fn ks_threshold(alpha: f64, n_a: usize, n_b: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError("alpha must lie in (0, 1)"));
    }
    if n_a == 0 || n_b == 0 {
        return Err(Error::EmptySample);
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    Ok(math::sqrt(-0.5 * math::ln(alpha) * (na + nb) / (na * nb)))
}

/// One-sample analogue of [`ks_threshold`], `sqrt(-½ log(α) / N)`.
pub fn ks_threshold_one_sample(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError("alpha must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(math::sqrt(-0.5 * math::ln(alpha) / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTestResult {
    pub statistic: f64,
    pub threshold: f64,
    pub alpha: f64,
    /// `statistic > threshold`.
    pub reject: bool,
    pub n_a: usize,
    pub n_b: usize,
}

impl KsTestResult {
    pub fn two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<Self> {
        let threshold = ks_threshold(alpha, a.len(), b.len())?;
        let statistic = ks_two_sample(a, b)?;
        Ok(Self {
            statistic,
            threshold,
            alpha,
            reject: statistic > threshold,
            n_a: a.len(),
            n_b: b.len(),
        })
    }
}

/// Everything computed by [`matrix_normality_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityTest {
    pub ks: KsTestResult,
    /// Multivariate MSDs `D`, in observation order.
    pub d_mvn: Vec<f64>,
    /// Matrix variate MSDs `D_M`, in observation order.
    pub d_mat: Vec<f64>,
    pub mvn: MvnEstimate,
    pub flip_flop: FlipFlopReport,
}

impl NormalityTest {
    pub fn pairs(&self) -> Vec<DistancePair> {
        self.d_mvn
            .iter()
            .zip(&self.d_mat)
            .map(|(&d_mvn, &d_mat)| DistancePair { d_mvn, d_mat })
            .collect()
    }
}

/// Tests whether `D` and `D_M` come from the same distribution. Rejection
/// indicates the covariance of `vec(X)` lacks Kronecker structure.
pub fn matrix_normality_test(data: &MatrixDataset, alpha: f64, flip_flop_tol: f64) -> Result<NormalityTest> {
    let p = data.rows() * data.cols();
    let n = data.len();
    if n < p + 2 {
        return Err(Error::SampleTooSmall { n, required: p + 2 });
    }
    // validate alpha before the expensive part
    ks_threshold(alpha, n, n)?;

    let mvn = estimate_mvn(data)?;
    let flip_flop = flip_flop_mle(data, flip_flop_tol, DEFAULT_MAX_ITER)?;
    let d_mvn = mvn_distances_with(data, &mvn.params)?;
    let d_mat = matnorm_distances_with(data, &flip_flop.params)?;
    let ks = KsTestResult::two_sample(&d_mvn, &d_mat, alpha)?;
    Ok(NormalityTest { ks, d_mvn, d_mat, mvn, flip_flop })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::estimation::DEFAULT_TOL;
    use crate::linalg::DenseMatrix;
    use crate::rng::Seed;
    use crate::simulation::{gen_matnorm_dataset, gen_nonkron_dataset};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    /// Evaluates both ECDFs by counting at every pooled point.
    fn brute_two_sample(a: &[f64], b: &[f64]) -> f64 {
        let count = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count();
        a.iter()
            .chain(b)
            .map(|&x| (count(a, x) as f64 / a.len() as f64 - count(b, x) as f64 / b.len() as f64).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ecdf_cases() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.eval(2.0), 2.0 / 3.0);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(3.0), 1.0);
        assert_eq!(e.eval(1e9), 1.0);
        let e = Ecdf::new(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.eval(1.0), 2.0 / 3.0);
        assert_eq!(Ecdf::new(&[]), Err(Error::EmptySample));
    }

    #[test]
    fn one_sample_cases() {
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        assert_eq!(ks_one_sample(&[0.5], uniform).unwrap(), 0.5);

        let n = 999;
        let q: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let stat = ks_one_sample(&q, uniform).unwrap();
        assert!(stat <= 1.0 / (n + 1) as f64 + 1e-12);

        // staircase cdf: brute-force scan over a fine grid of candidate points
        let cdf = |x: f64| if x < 0.0 { 0.0 } else if x < 1.0 { 0.3 } else { 1.0 };
        let sample = [-0.5, 0.2, 0.4, 0.9, 1.5];
        let stat = ks_one_sample(&sample, cdf).unwrap();
        let e = Ecdf::new(&sample).unwrap();
        let mut brute = 0.0f64;
        for &x in &sample {
            brute = brute.max((e.eval(x) - cdf(x)).abs());
            // left limit at the sample point
            let left = e.eval(x - 1e-12);
            brute = brute.max((left - cdf(x)).abs());
        }
        for k in -300..300 {
            let x = k as f64 * 0.01;
            brute = brute.max((e.eval(x) - cdf(x)).abs());
        }
        assert_abs_diff_eq!(stat, brute, epsilon = 1e-12);
    }

    #[test]
    fn two_sample_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        let b = [1.5, 2.5, 3.5];
        assert_abs_diff_eq!(ks_two_sample(&a, &b).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&a, &[]), Err(Error::EmptySample));
    }

    #[test]
    fn two_sample_matches_brute_force_with_ties() {
        let mut rng = Seed(31).generator();
        for _ in 0..300 {
            let na = rng.random_range(1..60);
            let nb = rng.random_range(1..60);
            let a: Vec<f64> = (0..na).map(|_| rng.random_range(0..12) as f64).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.random_range(0..12) as f64).collect();
            assert_eq!(ks_two_sample(&a, &b).unwrap(), brute_two_sample(&a, &b));
        }
    }

    #[test]
    fn threshold_values() {
        // mpmath, 30 digits
        assert_abs_diff_eq!(ks_threshold(0.05, 100, 100).unwrap(), 0.173081838260228534, epsilon = 1e-12);
        assert_abs_diff_eq!(ks_threshold(0.01, 500, 500).unwrap(), 0.0959705182437616242, epsilon = 1e-12);
        let mut prev = f64::INFINITY;
        for n in [10, 50, 100, 1000, 10_000] {
            let t = ks_threshold(0.05, n, n).unwrap();
            assert!(t < prev);
            prev = t;
        }
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(ks_threshold(bad, 10, 10), Err(Error::DomainError(_))));
        }
    }

    #[test]
    fn normality_test_small_sample() {
        let (data, _) = gen_matnorm_dataset(5, 2, 2, Seed(1)).unwrap();
        assert_eq!(
            matrix_normality_test(&data, 0.05, DEFAULT_TOL).map(|t| t.ks),
            Err(Error::SampleTooSmall { n: 5, required: 6 })
        );
        // sample size is reported even with a bad alpha
        assert!(matches!(
            matrix_normality_test(&data, 2.0, DEFAULT_TOL),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn normality_test_invariances() {
        let (data, _) = gen_nonkron_dataset(300, 3, 3, Seed(2)).unwrap();
        let base = matrix_normality_test(&data, 0.05, DEFAULT_TOL).unwrap();
        assert_eq!(base.ks.reject, base.ks.statistic > base.ks.threshold);
        assert_eq!(base.ks.n_a, 300);

        let mut obs = data.observations().to_vec();
        obs.reverse();
        let rev = matrix_normality_test(&MatrixDataset::new(obs).unwrap(), 0.05, DEFAULT_TOL).unwrap();
        assert_eq!(rev.ks.reject, base.ks.reject);
        assert_abs_diff_eq!(rev.ks.statistic, base.ks.statistic, epsilon = 1e-12);

        let shift = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 - 4.0);
        let moved = matrix_normality_test(&data.shifted(&shift).unwrap(), 0.05, DEFAULT_TOL).unwrap();
        assert_eq!(moved.ks.reject, base.ks.reject);
    }

    #[test]
    fn accepts_kronecker_data_usually() {
        let accepted = (0..100u64)
            .filter(|&k| {
                let (data, _) = gen_matnorm_dataset(1000, 2, 2, Seed(500).derive(k)).unwrap();
                !matrix_normality_test(&data, 0.05, DEFAULT_TOL).unwrap().ks.reject
            })
            .count();
        assert!(accepted >= 90, "accepted {accepted}/100");
    }

    proptest! {
        #[test]
        fn two_sample_exact_vs_brute(
            a in proptest::collection::vec(-5.0f64..5.0, 1..200),
            b in proptest::collection::vec(-5.0f64..5.0, 1..200),
        ) {
            prop_assert_eq!(ks_two_sample(&a, &b).unwrap(), brute_two_sample(&a, &b));
        }

        #[test]
        fn two_sample_symmetric_and_bounded(
            a in proptest::collection::vec(-5.0f64..5.0, 1..100),
            b in proptest::collection::vec(-5.0f64..5.0, 1..100),
        ) {
            let s = ks_two_sample(&a, &b).unwrap();
            prop_assert_eq!(s, ks_two_sample(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn two_sample_monotone_transform_invariant(
            a in proptest::collection::vec(-3.0f64..3.0, 1..100),
            b in proptest::collection::vec(-3.0f64..3.0, 1..100),
        ) {
            let f = |v: &f64| v.exp() * 2.0 + 1.0;
            let ta: Vec<f64> = a.iter().map(f).collect();
            let tb: Vec<f64> = b.iter().map(f).collect();
            prop_assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&ta, &tb).unwrap());
        }

        #[test]
        fn zero_iff_ecdfs_coincide(a in proptest::collection::vec(0u8..5, 1..30), dup in 1usize..4) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = a.iter().flat_map(|&v| core::iter::repeat_n(v, dup)).collect();
            prop_assert_eq!(ks_two_sample(&a, &b).unwrap(), 0.0);
            let mut c = b.clone();
            c.push(100.0);
            prop_assert!(ks_two_sample(&a, &c).unwrap() > 0.0);
        }
    }
}
