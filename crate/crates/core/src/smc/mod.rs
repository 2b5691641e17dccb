//! Sequential verification engines.
//!
//! Every engine draws batches of independent path tuples, tracks success
//! counts, and stops once the Clopper-Pearson significance of its current
//! assertion drops to the requested level, or once the sample cap is hit
//! (verdict `undecided`).
//!
//! | shape          | engine                   |
//! |----------------|--------------------------|
//! | `simple`       | [`verify_simple`]        |
//! | `joint`        | [`verify_joint`]         |
//! | `nested_state` | [`verify_nested_state`]  |
//! | `nested_path`  | [`verify_nested_path`]   |
//!
//! Seeds are derived from the master seed with a [`SeedTree`]: component `c`
//! of tuple `j` of operator `k` uses `root.child(k).child(j).child(c)`, so a
//! run is reproducible and independent of batch scheduling.

mod compile;
mod joint;
mod nested;
mod run;
mod simple;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use compile::{compile_flat, Operator};
pub use joint::verify_joint;
pub use nested::{verify_nested_path, verify_nested_state};
pub use simple::verify_simple;

use crate::logic::{classify, LogicError, Shape, StateFormula};
use crate::models::{ModelError, PusModel, SeedTree};
use crate::semantics::EvalError;
use crate::stats::{Region, StatsError};

/// What to do with a tuple whose formula value depends on time past the
/// horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationPolicy {
    /// Count the tuple as a failure.
    #[default]
    CountFalse,
    /// Abort the run.
    CountError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcConfig {
    /// Desired significance level.
    pub alpha: f64,
    /// Tuples drawn per operator and iteration.
    pub batch: u64,
    pub horizon: f64,
    pub seed: u64,
    /// Tuple budget; see each engine for what is counted.
    pub max_samples: u64,
    pub truncation: TruncationPolicy,
    /// Keep a per-iteration record of counts and significance.
    pub record_iterations: bool,
}

impl SmcConfig {
    pub const DEFAULT_BATCH: u64 = 10;
    pub const DEFAULT_MAX_SAMPLES: u64 = 1_000_000;

    pub fn new(alpha: f64, horizon: f64, seed: u64) -> Self {
        Self {
            alpha,
            batch: Self::DEFAULT_BATCH,
            horizon,
            seed,
            max_samples: Self::DEFAULT_MAX_SAMPLES,
            truncation: TruncationPolicy::CountFalse,
            record_iterations: false,
        }
    }

    pub fn validate(&self) -> Result<(), SmcError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SmcError::Config("significance must be in (0,1)".into()));
        }
        if self.batch == 0 {
            return Err(SmcError::Config("batch size must be at least 1".into()));
        }
        if self.max_samples < self.batch {
            return Err(SmcError::Config(format!(
                "sample cap {} is smaller than the batch size {}",
                self.max_samples, self.batch
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SmcError::Config(format!("horizon {} must be positive", self.horizon)));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SmcError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("region `{name}` has dimension {dim} but {given} operators were given")]
    RegionDimension { name: String, dim: usize, given: usize },
    #[error("`{operator}` needs the path beyond the horizon {horizon}")]
    Truncated { operator: String, horizon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assertion {
    True,
    False,
    Undecided,
}

impl Assertion {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Assertion::True
        } else {
            Assertion::False
        }
    }

    pub fn is_decided(self) -> bool {
        self != Assertion::Undecided
    }
}

impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Assertion::True => "true",
            Assertion::False => "false",
            Assertion::Undecided => "undecided",
        })
    }
}

/// Tuples drawn for one probability operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSamples {
    pub operator: String,
    pub tuples: u64,
    /// `tuples` times the number of quantified path variables.
    pub paths: u64,
}

/// Counts and significance after one iteration. For the nested-path engine
/// `samples` and `successes` hold the outer sample count and the number of
/// positive inner assertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub samples: Vec<u64>,
    pub successes: Vec<u64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub assertion: Assertion,
    /// Significance of the assertion; for `undecided` the last value seen.
    pub achieved_significance: f64,
    pub algorithm: Shape,
    pub samples_used: Vec<OperatorSamples>,
    pub truncated_evaluations: u64,
    /// Seconds.
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterations: Vec<IterationRecord>,
}

impl Verdict {
    /// Tuples drawn over all operators.
    pub fn total_tuples(&self) -> u64 {
        self.samples_used.iter().map(|s| s.tuples).sum()
    }
}

/// Seed of component `component` of tuple `tuple` of operator `operator` in
/// a flat (simple or joint) run with master seed `seed`.
pub fn tuple_seed(seed: u64, operator: u64, tuple: u64, component: u64) -> u64 {
    SeedTree::new(seed).child(operator).child(tuple).child(component).seed()
}

/// Classify `formula` and run the matching engine.
pub fn verify(
    model: &dyn PusModel,
    formula: &StateFormula,
    regions: &BTreeMap<String, Region>,
    cfg: &SmcConfig,
) -> Result<Verdict, SmcError> {
    cfg.validate()?;
    match classify(formula)? {
        Shape::Simple => verify_simple(model, formula, cfg),
        Shape::Joint => verify_joint(model, formula, regions, cfg),
        Shape::NestedState => verify_nested_state(model, formula, regions, cfg),
        Shape::NestedPath => verify_nested_path(model, formula, regions, cfg),
    }
}

/// Wall-clock stopwatch shared by the engines.
pub(crate) struct Clock(Instant);

impl Clock {
    pub(crate) fn start() -> Self {
        Clock(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests;
