//! Assessing matrix variate normality of three-way data.
//!
//! Every observation is an `r × c` matrix. Under matrix variate normality the
//! vectorised observations are multivariate normal with a Kronecker-structured
//! covariance `V ⊗ U`, so two Mahalanobis squared distances can be computed
//! per observation:
//!
//! - the multivariate distance against the unstructured sample mean and
//!   covariance ([`distances::mvn_distances`]), and
//! - the matrix variate distance against the flip-flop maximum likelihood
//!   estimates ([`distances::matnorm_distances`]).
//!
//! When the Kronecker structure is present both converge to the same value.
//! Plotting one against the other gives a DD plot ([`ddplot`]); comparing the
//! two samples with a two-sample Kolmogorov–Smirnov statistic gives a test
//! ([`kstest::matrix_normality_test`]). The [`simulation`] module generates
//! data with and without the structure and runs Type 1 error and power sweeps.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel sweeps live in the companion `matvar` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod ddplot;
pub mod distances;
pub mod distributions;
pub mod estimation;
pub mod kstest;
pub mod linalg;
pub mod rng;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};

pub use ddplot::{dd_points, render_csv, render_svg, DdPlotData};
pub use distances::{
    matnorm_distances, msd, msd_matrix, mvn_distances, scale_for_beta, DistancePair,
};
pub use distributions::{MatrixDataset, MatrixNormalParams, MvnParams};
pub use estimation::{estimate_mvn, flip_flop_mle, normalize_scale, FlipFlopReport, MvnEstimate};
pub use kstest::{
    ks_one_sample, ks_threshold, ks_two_sample, matrix_normality_test, Ecdf, KsTestResult,
    NormalityTest,
};
pub use linalg::{DenseMatrix, RealVector, SpdMatrix};
pub use rng::Seed;
pub use simulation::{SweepConfig, SweepRow};
