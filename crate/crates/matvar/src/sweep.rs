//! Parallel Monte-Carlo sweep.
//!
//! Every replicate is seeded from its grid position, so the parallel result
//! is identical to [`matvar_core::simulation::sweep`] whatever the thread
//! count or scheduling.

use rayon::prelude::*;

use matvar_core::simulation::{run_replicate, DataKind};
use matvar_core::{SweepConfig, SweepRow};

use crate::error::Result;

pub fn parallel_sweep(kind: DataKind, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|i| (0..cfg.replicates).map(move |k| (i, k)))
        .collect();
    let outcomes: Vec<Option<bool>> = jobs
        .par_iter()
        .map(|&(i, k)| run_replicate(kind, &cells[i], cfg, k).ok())
        .collect();
    Ok(cells
        .iter()
        .zip(outcomes.chunks(cfg.replicates))
        .map(|(cell, chunk)| {
            let rejections = chunk.iter().filter(|o| **o == Some(true)).count();
            let failures = chunk.iter().filter(|o| o.is_none()).count();
            SweepRow::from_counts(cell, cfg.replicates, rejections, failures)
        })
        .collect())
}
