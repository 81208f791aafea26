//! File formats, parallel sweeps and the command-line front end for
//! [`matvar_core`].

// `!(x > 0.0)` is used on purpose so that NaN fails argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod mnist;
pub mod report;
pub mod sweep;

pub use error::{AppError, Result};
