//! Single operator against a constant threshold.

use super::compile::compile_flat;
use super::run::{eval_tuple, settle};
use super::{Assertion, Clock, IterationRecord, OperatorSamples, SmcConfig, SmcError, Verdict};
use crate::logic::{classify, CmpOp, LogicError, ProbExpr, Shape, StateFormula};
use crate::models::{PusModel, SeedTree};
use crate::stats::cp_for_threshold;

/// Decide `P{X}(phi) ~ p`.
///
/// The comparison is brought into the form `P ~ p` (a constant on the left
/// flips the operator). For `<` and `<=` the formula holds when the estimate
/// is below `p`; for `>` and `>=` when it is above. Both directions share
/// the same counts and the same CP significance: the value for `[0, p]`
/// below the threshold and for `[p, 1]` above it.
pub fn verify_simple(model: &dyn PusModel, formula: &StateFormula, cfg: &SmcConfig) -> Result<Verdict, SmcError> {
    cfg.validate()?;
    let clock = Clock::start();
    if classify(formula)? != Shape::Simple {
        return Err(LogicError::UnsupportedShape("not a single operator compared with a constant".into()).into());
    }
    let StateFormula::Compare { left, op, right } = formula else { unreachable!("simple shape") };
    let (p, op) = match (left, right) {
        (ProbExpr::Prob { .. }, ProbExpr::Const(c)) => (*c, *op),
        (ProbExpr::Const(c), ProbExpr::Prob { .. }) => (*c, op.flip()),
        _ => unreachable!("simple shape"),
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(SmcError::Config(format!("threshold {p} outside [0, 1]")));
    }
    let below_is_true = match op {
        CmpOp::Lt | CmpOp::Le => true,
        CmpOp::Gt | CmpOp::Ge => false,
        CmpOp::Eq => unreachable!("rejected by classify"),
    };
    let (ops, _) = compile_flat(formula, &Default::default())?;
    let operator = &ops[0];
    let stream = SeedTree::new(cfg.seed).child(0);

    let (mut t, mut n, mut truncated) = (0u64, 0u64, 0u64);
    let mut assertion = Assertion::Undecided;
    let mut alpha = 1.0;
    let mut log = Vec::new();
    while alpha > cfg.alpha {
        if n >= cfg.max_samples {
            assertion = Assertion::Undecided;
            break;
        }
        for _ in 0..cfg.batch {
            let outcome = eval_tuple(model, operator, stream.child(n), &[], cfg.horizon)?;
            if settle(outcome, operator, cfg, &mut truncated)? {
                t += 1;
            }
            n += 1;
        }
        let (below, a) = cp_for_threshold(t, n, p)?;
        alpha = a;
        let exactly_at = t as f64 / n as f64 == p;
        assertion = if exactly_at {
            Assertion::Undecided
        } else {
            Assertion::from_bool(below == below_is_true)
        };
        if cfg.record_iterations {
            log.push(IterationRecord { samples: vec![n], successes: vec![t], alpha });
        }
    }
    Ok(Verdict {
        assertion,
        achieved_significance: alpha,
        algorithm: Shape::Simple,
        samples_used: vec![OperatorSamples {
            operator: operator.text.clone(),
            tuples: n,
            paths: n * operator.vars.len() as u64,
        }],
        truncated_evaluations: truncated,
        wall_time: clock.seconds(),
        iterations: log,
    })
}
