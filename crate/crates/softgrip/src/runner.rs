//! Parallel batch execution.

use rayon::prelude::*;
use softgrip_core::batch::{Batch, BatchSummary};
use softgrip_core::MissionError;

/// Runs every trial of `batch` on the rayon pool. The summary is identical
/// to the sequential [`softgrip_core::batch::monte_carlo`].
pub fn run_batch(batch: &Batch) -> Result<BatchSummary, MissionError> {
    batch.validate()?;
    (0..batch.trials)
        .into_par_iter()
        .map(|i| {
            let mut s = BatchSummary::default();
            s.record(&batch.run_trial(i)?);
            Ok(s)
        })
        .try_reduce(BatchSummary::default, |a, b| Ok(a.merge(b)))
}
