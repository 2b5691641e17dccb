//! Stochastic systems that produce sample paths.
//!
//! Every model is a deterministic function of `(seed, horizon)`; tuples of
//! independent paths draw component seeds from a [`SeedTree`].

mod ctmc;
mod hybrid;
mod queue;
mod seed;

pub use ctmc::CtmcModel;
pub use hybrid::{HybridModel, ParamDist, Predicate, PredicateOp, Template};
pub use queue::{ArrivalProcess, QueueEvent, QueueModel, QueueState};
pub use seed::{splitmix64, SeedTree};

use crate::semantics::{EvalError, Trace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("state became non-finite at t = {t}")]
    NonfiniteState { t: f64 },
    #[error("too many guard-triggered jumps within one step at t = {t}")]
    ZenoGuard { t: f64 },
    #[error("state space cannot be enumerated: {0}")]
    InfiniteStateSpace(String),
    #[error(transparent)]
    Trace(#[from] EvalError),
}

/// A stochastic system that can be sampled path by path.
pub trait PusModel: Send + Sync {
    /// Short model family name (`ctmc`, `hybrid`, `queue`).
    fn kind(&self) -> &'static str;

    /// Labels that may appear on traces.
    fn label_names(&self) -> &[String];

    /// Draw one path on `[0, horizon]`; the same seed gives the same trace.
    fn sample(&self, seed: u64, horizon: f64) -> Result<Trace, ModelError>;

    /// Names of the states when the state space is finite and enumerable.
    fn state_names(&self) -> Option<Vec<String>> {
        None
    }

    /// The same system started in state `state` (an index into
    /// [`PusModel::state_names`]).
    fn restarted(&self, _state: usize) -> Result<Box<dyn PusModel>, ModelError> {
        Err(ModelError::InfiniteStateSpace(format!(
            "{} models cannot be restarted from an arbitrary state",
            self.kind()
        )))
    }

    /// The same system with `label` attached to the given states.
    fn with_state_label(&self, _label: &str, _states: &[usize]) -> Result<Box<dyn PusModel>, ModelError> {
        Err(ModelError::InfiniteStateSpace(format!(
            "{} models do not expose a finite state labelling",
            self.kind()
        )))
    }
}

/// Draw `k` independent paths; component `i` uses seed `node.child(i)`.
pub fn sample_tuple(
    model: &dyn PusModel,
    node: SeedTree,
    k: usize,
    horizon: f64,
) -> Result<Vec<Trace>, ModelError> {
    (0..k).map(|i| model.sample(node.child(i as u64).seed(), horizon)).collect()
}
