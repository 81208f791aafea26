use alloc::boxed::Box;

use crate::estimation::FlipFlopReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(&'static str),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("argument out of domain: {0}")]
    DomainError(&'static str),
    #[error("sample too small: N = {n}, need at least {required}")]
    SampleTooSmall { n: usize, required: usize },
    #[error("sample covariance is singular")]
    SingularCovariance,
    #[error("flip-flop scale update is not positive definite")]
    SingularUpdate,
    #[error("flip-flop did not converge after {} iterations", .0.iterations)]
    MaxIterationsExceeded(Box<FlipFlopReport>),
    #[error("empty sample")]
    EmptySample,
}
