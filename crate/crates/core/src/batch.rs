//! Monte Carlo batches over a mission template.
//!
//! Trial `i` runs the template with seed [`trial_seed`]`(master, i)`, and
//! optionally with every placement offset jittered uniformly by up to
//! `offset_jitter` mm from that trial's own perturbation stream. Trials share
//! nothing, so they can run in any order or in parallel; [`BatchSummary`] is
//! an order-independent reduction.

use alloc::collections::BTreeMap;
use alloc::string::String;

use rand::Rng;

use crate::mission::{self, Action, MissionError, MissionOutcome, MissionScript, SimConfig};
use crate::rng::{self, trial_seed, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub template: MissionScript,
    pub config: SimConfig,
    pub trials: u32,
    pub seed: u64,
    /// Half-width of the uniform lateral placement error, mm.
    pub offset_jitter: f64,
}

impl Batch {
    pub fn validate(&self) -> Result<(), MissionError> {
        if self.trials == 0 {
            return Err(MissionError::InvalidScript("trial count must be at least 1".into()));
        }
        if !(self.offset_jitter >= 0.0 && self.offset_jitter.is_finite()) {
            return Err(MissionError::InvalidScript("offset jitter must be non-negative".into()));
        }
        self.config.validate()?;
        self.template.validate()
    }

    /// The concrete script for one trial.
    pub fn trial_script(&self, index: u32) -> MissionScript {
        let seed = trial_seed(self.seed, index as u64);
        let mut script = self.template.clone();
        script.seed = seed;
        if self.offset_jitter > 0.0 {
            let mut perturb = rng::stream(seed, Stream::Perturbation);
            for step in script.steps.iter_mut() {
                if let Action::PlaceObject { offset, .. } = &mut step.action {
                    *offset += perturb.random_range(-self.offset_jitter..=self.offset_jitter);
                }
            }
        }
        script
    }

    pub fn run_trial(&self, index: u32) -> Result<MissionOutcome, MissionError> {
        mission::mission_outcome(&self.trial_script(index), &self.config).map(|r| r.outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatchSummary {
    pub total: u32,
    pub success_count: u32,
    /// Failure counts keyed by reason name.
    pub failures: BTreeMap<String, u32>,
}

impl BatchSummary {
    pub fn record(&mut self, outcome: &MissionOutcome) {
        self.total += 1;
        match outcome {
            MissionOutcome::Success => self.success_count += 1,
            MissionOutcome::Failure(r) => *self.failures.entry(r.as_str().into()).or_insert(0) += 1,
        }
    }

    pub fn merge(mut self, other: BatchSummary) -> BatchSummary {
        self.total += other.total;
        self.success_count += other.success_count;
        for (k, v) in other.failures {
            *self.failures.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.success_count as f64 / self.total as f64
        }
    }

    pub fn failure_count(&self) -> u32 {
        self.failures.values().sum()
    }
}

impl<'a> FromIterator<&'a MissionOutcome> for BatchSummary {
    fn from_iter<I: IntoIterator<Item = &'a MissionOutcome>>(iter: I) -> Self {
        let mut s = BatchSummary::default();
        for o in iter {
            s.record(o);
        }
        s
    }
}

/// Runs all trials sequentially.
pub fn monte_carlo(batch: &Batch) -> Result<BatchSummary, MissionError> {
    batch.validate()?;
    let mut summary = BatchSummary::default();
    for i in 0..batch.trials {
        summary.record(&batch.run_trial(i)?);
    }
    Ok(summary)
}
