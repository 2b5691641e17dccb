//! Statistical primitives: incomplete beta, Clopper-Pearson significance,
//! binomial CDF, and region boxes for joint assertions.

mod beta;
mod cp;
mod region;

pub use beta::{ln_beta, ln_gamma, reg_inc_beta};
pub use cp::{binom_cdf, cp_for_threshold, cp_significance};
pub use region::{joint_significance, Halfspace, Region};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
}
