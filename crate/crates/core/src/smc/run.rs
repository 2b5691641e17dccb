//! Tuple evaluation and the resumable joint run shared by the engines.

use super::compile::Operator;
use super::{Assertion, IterationRecord, OperatorSamples, SmcConfig, SmcError, TruncationPolicy};
use crate::models::{PusModel, SeedTree};
use crate::semantics::{eval_path, EvalError, PathAssignment, Trace};
use crate::stats::{joint_significance, Region};

/// Draw the tuple at `node` for `op` and evaluate its body at time 0, with
/// the traces in `fixed` bound as well. `None` means the value depends on
/// the path beyond the horizon.
pub(crate) fn eval_tuple(
    model: &dyn PusModel,
    op: &Operator,
    node: SeedTree,
    fixed: &[(String, Trace)],
    horizon: f64,
) -> Result<Option<bool>, SmcError> {
    let traces = op
        .vars
        .iter()
        .enumerate()
        .map(|(c, _)| model.sample(node.child(c as u64).seed(), horizon))
        .collect::<Result<Vec<_>, _>>()?;
    let mut v = PathAssignment::new();
    for (name, tr) in fixed {
        v = v.bind(name.clone(), tr);
    }
    for (name, tr) in op.vars.iter().zip(&traces) {
        v = v.bind(name.clone(), tr);
    }
    match eval_path(&op.body, &v, 0.0) {
        Ok(b) => Ok(Some(b)),
        Err(EvalError::HorizonExceeded { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Apply the truncation policy to an evaluation result.
pub(crate) fn settle(
    outcome: Option<bool>,
    op: &Operator,
    cfg: &SmcConfig,
    truncated: &mut u64,
) -> Result<bool, SmcError> {
    match outcome {
        Some(b) => Ok(b),
        None => {
            *truncated += 1;
            match cfg.truncation {
                TruncationPolicy::CountFalse => Ok(false),
                TruncationPolicy::CountError => {
                    Err(SmcError::Truncated { operator: op.text.clone(), horizon: cfg.horizon })
                }
            }
        }
    }
}

/// Joint assertion `(P1, ..., Pn) in D` that can be extended batch by batch.
///
/// After every batch the point of empirical frequencies is located: a box
/// around it inside `D` supports `true`, a box inside the complement
/// supports `false`, and the significance is the joint CP value of that box.
/// A point on the boundary supports neither and has significance 1.
pub(crate) struct JointRun<'a> {
    ops: &'a [Operator],
    region: &'a Region,
    complement: &'a Region,
    root: SeedTree,
    fixed: Vec<(String, Trace)>,
    /// `(successes, trials)` per operator.
    pub counts: Vec<(u64, u64)>,
    pub truncated: u64,
    pub assertion: Assertion,
    pub alpha: f64,
    pub log: Vec<IterationRecord>,
}

impl<'a> JointRun<'a> {
    pub fn new(
        ops: &'a [Operator],
        region: &'a Region,
        complement: &'a Region,
        root: SeedTree,
        fixed: Vec<(String, Trace)>,
    ) -> Self {
        Self {
            ops,
            region,
            complement,
            root,
            fixed,
            counts: vec![(0, 0); ops.len()],
            truncated: 0,
            assertion: Assertion::Undecided,
            alpha: 1.0,
            log: Vec::new(),
        }
    }

    /// Tuples drawn per operator.
    pub fn trials(&self) -> u64 {
        self.counts.first().map_or(0, |c| c.1)
    }

    /// Draw one batch for every operator and update the assertion.
    pub fn batch(&mut self, model: &dyn PusModel, cfg: &SmcConfig) -> Result<(), SmcError> {
        for (k, op) in self.ops.iter().enumerate() {
            let stream = self.root.child(k as u64);
            let (mut t, mut n) = self.counts[k];
            for _ in 0..cfg.batch {
                let outcome = eval_tuple(model, op, stream.child(n), &self.fixed, cfg.horizon)?;
                if settle(outcome, op, cfg, &mut self.truncated)? {
                    t += 1;
                }
                n += 1;
            }
            self.counts[k] = (t, n);
        }
        self.update()?;
        if cfg.record_iterations {
            self.log.push(IterationRecord {
                samples: self.counts.iter().map(|c| c.1).collect(),
                successes: self.counts.iter().map(|c| c.0).collect(),
                alpha: self.alpha,
            });
        }
        Ok(())
    }

    fn update(&mut self) -> Result<(), SmcError> {
        let x: Vec<f64> = self.counts.iter().map(|&(t, n)| t as f64 / n as f64).collect();
        let (assertion, bx) = if let Some(bx) = self.region.largest_box(&x) {
            (Assertion::True, bx)
        } else if let Some(bx) = self.complement.largest_box(&x) {
            (Assertion::False, bx)
        } else {
            self.assertion = Assertion::Undecided;
            self.alpha = 1.0;
            return Ok(());
        };
        self.assertion = assertion;
        self.alpha = joint_significance(&bx, &self.counts)?;
        Ok(())
    }

    /// Sample until the significance reaches `target` or `cap` tuples per
    /// operator have been drawn. Returns whether the target was reached.
    pub fn run_until(
        &mut self,
        model: &dyn PusModel,
        cfg: &SmcConfig,
        target: f64,
        cap: u64,
    ) -> Result<bool, SmcError> {
        while !(self.assertion.is_decided() && self.alpha <= target) {
            if self.trials() >= cap {
                return Ok(false);
            }
            self.batch(model, cfg)?;
        }
        Ok(true)
    }

    pub fn samples(&self) -> Vec<OperatorSamples> {
        self.ops
            .iter()
            .zip(&self.counts)
            .map(|(op, &(_, n))| OperatorSamples {
                operator: op.text.clone(),
                tuples: n,
                paths: n * op.vars.len() as u64,
            })
            .collect()
    }
}
