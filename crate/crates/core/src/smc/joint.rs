//! Several operators whose probabilities must fall into a region.

use std::collections::BTreeMap;

use super::compile::{compile_flat, Operator};
use super::run::JointRun;
use super::{Assertion, Clock, SmcConfig, SmcError, Verdict};
use crate::logic::{classify, LogicError, Shape, StateFormula};
use crate::models::{PusModel, SeedTree};
use crate::stats::Region;

/// Decide `(P1, ..., Pn) in D`, either written with a named region or as an
/// arithmetic comparison of probabilities (compiled to a region).
pub fn verify_joint(
    model: &dyn PusModel,
    formula: &StateFormula,
    regions: &BTreeMap<String, Region>,
    cfg: &SmcConfig,
) -> Result<Verdict, SmcError> {
    cfg.validate()?;
    let clock = Clock::start();
    match classify(formula)? {
        Shape::Simple | Shape::Joint => {}
        _ => return Err(LogicError::UnsupportedShape("operators must have flat bodies".into()).into()),
    }
    let (ops, region) = compile_flat(formula, regions)?;
    let mut verdict = run_joint(model, &ops, &region, SeedTree::new(cfg.seed), cfg, cfg.alpha)?;
    verdict.wall_time = clock.seconds();
    Ok(verdict)
}

/// Run a joint assertion to significance `alpha` from seed node `root`.
pub(crate) fn run_joint(
    model: &dyn PusModel,
    ops: &[Operator],
    region: &Region,
    root: SeedTree,
    cfg: &SmcConfig,
    alpha: f64,
) -> Result<Verdict, SmcError> {
    region.validate()?;
    let complement = region.complement();
    let mut run = JointRun::new(ops, region, &complement, root, Vec::new());
    let reached = run.run_until(model, cfg, alpha, cfg.max_samples)?;
    Ok(Verdict {
        assertion: if reached { run.assertion } else { Assertion::Undecided },
        achieved_significance: run.alpha,
        algorithm: Shape::Joint,
        samples_used: run.samples(),
        truncated_evaluations: run.truncated,
        wall_time: 0.0,
        iterations: std::mem::take(&mut run.log),
    })
}
