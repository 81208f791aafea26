//! Digit selection and jitter for the MNIST demo.

use rand::Rng;
use rand_distr::StandardNormal;

use matvar_core::{DenseMatrix, MatrixDataset, Seed};

use crate::error::{AppError, Result};

/// Images whose label is in `digits`, pooled in file order, with their labels.
pub fn select_digits(images: &MatrixDataset, labels: &[u8], digits: &[u8]) -> Result<(MatrixDataset, Vec<u32>)> {
    if images.len() != labels.len() {
        return Err(AppError::CountMismatch { images: images.len(), labels: labels.len() });
    }
    let (picked, kept): (Vec<DenseMatrix>, Vec<u32>) = images
        .iter()
        .zip(labels)
        .filter(|(_, l)| digits.contains(l))
        .map(|(x, &l)| (x.clone(), u32::from(l)))
        .unzip();
    if picked.is_empty() {
        return Err(AppError::Usage(format!("no images with labels {digits:?}")));
    }
    Ok((MatrixDataset::new(picked)?, kept))
}

/// Adds iid `N(0, eps²)` noise to every entry. Raw pixels include
/// constant border values that make every covariance estimate singular; a
/// small jitter restores full rank.
pub fn jitter(data: &MatrixDataset, eps: f64, seed: Seed) -> Result<MatrixDataset> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(AppError::Usage(format!("jitter must be a non-negative number, got {eps}")));
    }
    let mut rng = seed.generator();
    let (r, c) = data.shape();
    let noisy = data
        .iter()
        .map(|x| {
            DenseMatrix::from_fn(r, c, |i, j| {
                let z: f64 = rng.sample(StandardNormal);
                x[(i, j)] + eps * z
            })
        })
        .collect();
    Ok(MatrixDataset::new(noisy)?)
}
