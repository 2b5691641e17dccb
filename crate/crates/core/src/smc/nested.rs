//! Formulas with one level of nesting.

use std::collections::BTreeMap;

use super::compile::compile_flat;
use super::joint::run_joint;
use super::run::JointRun;
use super::simple::verify_simple;
use super::{Assertion, Clock, IterationRecord, OperatorSamples, SmcConfig, SmcError, Verdict};
use crate::logic::{
    classify, embedded_states, CmpOp, LogicError, PathFormula, ProbBody, ProbExpr, Shape, StateFormula,
};
use crate::models::{ModelError, PusModel, SeedTree};
use crate::stats::{binom_cdf, cp_significance, Region};

const STREAM_INNER: u64 = 1 << 32;
const STREAM_OUTER: u64 = 2 << 32;

/// Label that replaces the `k`-th embedded state formula.
pub fn embed_label(k: usize) -> String {
    format!("__rho{}", k + 1)
}

fn wrong_shape(msg: &str) -> SmcError {
    LogicError::UnsupportedShape(msg.into()).into()
}

fn replace_embeds(p: &PathFormula, rhos: &[&StateFormula]) -> PathFormula {
    match p {
        PathFormula::True | PathFormula::Atom { .. } => p.clone(),
        PathFormula::Embed { state, var } => {
            let k = rhos.iter().position(|r| *r == state.as_ref()).expect("collected embed");
            PathFormula::atom(embed_label(k), var.clone())
        }
        PathFormula::Not(f) => PathFormula::not(replace_embeds(f, rhos)),
        PathFormula::And(a, b) => PathFormula::and(replace_embeds(a, rhos), replace_embeds(b, rhos)),
        PathFormula::Until { left, right, lo, hi } => {
            PathFormula::until(replace_embeds(left, rhos), replace_embeds(right, rhos), *lo, *hi)
        }
    }
}

fn rewrite_expr(e: &ProbExpr, rhos: &[&StateFormula]) -> ProbExpr {
    match e {
        ProbExpr::Prob { vars, body } => match body.as_ref() {
            ProbBody::Path(p) => ProbExpr::Prob { vars: vars.clone(), body: Box::new(ProbBody::Path(replace_embeds(p, rhos))) },
            ProbBody::State(_) => e.clone(),
        },
        ProbExpr::Const(_) => e.clone(),
        ProbExpr::Arith { op, args } => ProbExpr::Arith { op: *op, args: args.iter().map(|a| rewrite_expr(a, rhos)).collect() },
    }
}

fn rewrite_state(f: &StateFormula, rhos: &[&StateFormula]) -> StateFormula {
    match f {
        StateFormula::Compare { left, op, right } => StateFormula::Compare {
            left: rewrite_expr(left, rhos),
            op: *op,
            right: rewrite_expr(right, rhos),
        },
        StateFormula::InRegion { exprs, region } => StateFormula::InRegion {
            exprs: exprs.iter().map(|e| rewrite_expr(e, rhos)).collect(),
            region: region.clone(),
        },
    }
}

fn add_samples(into: &mut Vec<OperatorSamples>, prefix: &str, more: &[OperatorSamples]) {
    for s in more {
        let name = format!("{prefix}{}", s.operator);
        match into.iter_mut().find(|x| x.operator == name) {
            Some(x) => {
                x.tuples += s.tuples;
                x.paths += s.paths;
            }
            None => into.push(OperatorSamples { operator: name, ..s.clone() }),
        }
    }
}

/// Decide a formula whose path bodies embed closed state formulas `rho_k`.
///
/// With `m` distinct embedded formulas and `|X|` states, every `rho_k` is
/// checked from every state at level `alpha / (|X| m + 1)`; the states where
/// it is asserted get a fresh label that replaces the embedding, and the
/// rewritten outer formula is checked on the relabelled model at the same
/// level. The reported significance is the sum of the levels achieved.
pub fn verify_nested_state(
    model: &dyn PusModel,
    formula: &StateFormula,
    regions: &BTreeMap<String, Region>,
    cfg: &SmcConfig,
) -> Result<Verdict, SmcError> {
    cfg.validate()?;
    let clock = Clock::start();
    if classify(formula)? != Shape::NestedState {
        return Err(wrong_shape("no embedded state formulas"));
    }
    let states = model.state_names().ok_or_else(|| {
        ModelError::InfiniteStateSpace(format!("{} models have no enumerable state space", model.kind()))
    })?;
    let mut rhos: Vec<&StateFormula> = Vec::new();
    for p in formula.probs() {
        if let ProbExpr::Prob { body, .. } = p {
            if let ProbBody::Path(path) = body.as_ref() {
                for s in embedded_states(path) {
                    if !rhos.contains(&s) {
                        rhos.push(s);
                    }
                }
            }
        }
    }
    let share = cfg.alpha / (states.len() * rhos.len() + 1) as f64;
    let root = SeedTree::new(cfg.seed);

    let mut total_alpha = 0.0;
    let mut samples = Vec::new();
    let mut truncated = 0;
    let mut undecided = false;
    let mut relabelled: Option<Box<dyn PusModel>> = None;
    for (k, rho) in rhos.iter().enumerate() {
        let (ops, region) = compile_flat(rho, regions)?;
        let mut satisfying = Vec::new();
        for x in 0..states.len() {
            let from_x = model.restarted(x)?;
            let node = root.child(STREAM_INNER).child(k as u64).child(x as u64);
            let v = run_joint(from_x.as_ref(), &ops, &region, node, cfg, share)?;
            total_alpha += v.achieved_significance;
            truncated += v.truncated_evaluations;
            add_samples(&mut samples, &format!("{} @ {}: ", embed_label(k), states[x]), &v.samples_used);
            match v.assertion {
                Assertion::True => satisfying.push(x),
                Assertion::False => {}
                Assertion::Undecided => undecided = true,
            }
        }
        let base: &dyn PusModel = relabelled.as_deref().unwrap_or(model);
        relabelled = Some(base.with_state_label(&embed_label(k), &satisfying)?);
    }
    if undecided {
        return Ok(Verdict {
            assertion: Assertion::Undecided,
            achieved_significance: total_alpha.min(1.0),
            algorithm: Shape::NestedState,
            samples_used: samples,
            truncated_evaluations: truncated,
            wall_time: clock.seconds(),
            iterations: Vec::new(),
        });
    }
    let relabelled = relabelled.expect("at least one embedded formula");
    let outer = rewrite_state(formula, &rhos);
    let outer_cfg = SmcConfig { alpha: share, ..cfg.clone() };
    let v = match classify(&outer)? {
        Shape::Simple => verify_simple(relabelled.as_ref(), &outer, &outer_cfg)?,
        _ => {
            let (ops, region) = compile_flat(&outer, regions)?;
            run_joint(relabelled.as_ref(), &ops, &region, root, cfg, share)?
        }
    };
    add_samples(&mut samples, "", &v.samples_used);
    Ok(Verdict {
        assertion: v.assertion,
        achieved_significance: (total_alpha + v.achieved_significance).min(1.0),
        algorithm: Shape::NestedState,
        samples_used: samples,
        truncated_evaluations: truncated + v.truncated_evaluations,
        wall_time: clock.seconds(),
        iterations: v.iterations,
    })
}

/// Decide `P{X1}(inner) ~ p1`, where `inner` is a flat state formula over
/// path variables disjoint from `X1`.
///
/// Each outer tuple `S_i` fixes `X1` and gets its own resumable joint run
/// for `inner`, whose assertion `A_i` estimates the indicator that `inner`
/// holds under `S_i`. With `A = sum A_i` over `N` outer tuples and
/// `Delta = ceil(c alpha1 N)`, `|T - A| <= Delta` fails with probability at
/// most `alpha2 = 1 - F_Binom(Delta | N, alpha1)`, so the true count lies in
/// `[max(0, A - Delta), min(A + Delta, N)]`. The outer probability is below
/// `p1` when the upper end is, above when the lower end is, and the overall
/// significance is `alpha2` plus the CP value of that end. After every outer
/// sample `c` grows when `alpha2` dominates, otherwise `alpha1` halves and
/// every inner run resumes sampling until it meets the new level.
///
/// The sample cap bounds outer tuples plus inner tuples of every operator.
pub fn verify_nested_path(
    model: &dyn PusModel,
    formula: &StateFormula,
    regions: &BTreeMap<String, Region>,
    cfg: &SmcConfig,
) -> Result<Verdict, SmcError> {
    cfg.validate()?;
    let clock = Clock::start();
    if classify(formula)? != Shape::NestedPath {
        return Err(wrong_shape("not a nested path formula"));
    }
    let StateFormula::Compare { left, op, right } = formula else { unreachable!("nested path shape") };
    let (outer, p1, op) = match (left, right) {
        (e @ ProbExpr::Prob { .. }, ProbExpr::Const(c)) => (e, *c, *op),
        (ProbExpr::Const(c), e @ ProbExpr::Prob { .. }) => (e, *c, op.flip()),
        _ => unreachable!("nested path shape"),
    };
    if !(0.0..=1.0).contains(&p1) {
        return Err(SmcError::Config(format!("threshold {p1} outside [0, 1]")));
    }
    let below_is_true = matches!(op, CmpOp::Lt | CmpOp::Le);
    let ProbExpr::Prob { vars: outer_vars, body } = outer else { unreachable!() };
    let ProbBody::State(inner) = body.as_ref() else { unreachable!() };
    let (ops, region) = compile_flat(inner, regions)?;
    region.validate()?;
    let complement = region.complement();
    let root = SeedTree::new(cfg.seed);
    let outer_stream = root.child(STREAM_OUTER);
    let inner_root = root.child(STREAM_INNER);
    let per_tuple = ops.len() as u64;

    let mut runs: Vec<JointRun> = Vec::new();
    let (mut c, mut alpha1, mut alpha) = (1u64, cfg.alpha, 1.0f64);
    let mut n = 0u64;
    let mut assertion = Assertion::Undecided;
    let mut log = Vec::new();
    let inner_used = |runs: &[JointRun]| runs.iter().map(|r| r.trials() * per_tuple).sum::<u64>();

    'outer: while alpha > cfg.alpha {
        if n + inner_used(&runs) >= cfg.max_samples {
            assertion = Assertion::Undecided;
            break;
        }
        let node = outer_stream.child(n);
        let fixed = outer_vars
            .iter()
            .enumerate()
            .map(|(k, v)| Ok((v.clone(), model.sample(node.child(k as u64).seed(), cfg.horizon)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        runs.push(JointRun::new(&ops, &region, &complement, inner_root.child(n), fixed));
        n += 1;

        for k in 0..runs.len() {
            let remaining = cfg.max_samples.saturating_sub(n + inner_used(&runs));
            let cap = runs[k].trials() + remaining / per_tuple;
            if !runs[k].run_until(model, cfg, alpha1, cap)? {
                assertion = Assertion::Undecided;
                break 'outer;
            }
        }
        let a = runs.iter().filter(|r| r.assertion == Assertion::True).count() as u64;
        let delta = (c as f64 * alpha1 * n as f64).ceil() as u64;
        let alpha2 = 1.0 - binom_cdf(delta, n, alpha1)?;
        let t_lo = a.saturating_sub(delta);
        let t_hi = (a + delta).min(n);
        let nf = n as f64;
        let side = if (t_hi as f64) / nf < p1 {
            Some((true, cp_significance(0.0, p1, t_hi, n)?))
        } else if (t_lo as f64) / nf > p1 {
            Some((false, cp_significance(p1, 1.0, t_lo, n)?))
        } else {
            None
        };
        alpha = match side {
            Some((below, cp)) => {
                assertion = Assertion::from_bool(below == below_is_true);
                (alpha2 + cp).min(1.0)
            }
            None => {
                assertion = Assertion::Undecided;
                1.0
            }
        };
        if cfg.record_iterations {
            log.push(IterationRecord { samples: vec![n], successes: vec![a], alpha });
        }
        if alpha2 > alpha / 2.0 {
            c += 1;
        } else {
            alpha1 /= 2.0;
        }
    }

    let mut samples = vec![OperatorSamples {
        operator: outer.to_string(),
        tuples: n,
        paths: n * outer_vars.len() as u64,
    }];
    for r in &runs {
        add_samples(&mut samples, "", &r.samples());
    }
    Ok(Verdict {
        assertion,
        achieved_significance: alpha,
        algorithm: Shape::NestedPath,
        samples_used: samples,
        truncated_evaluations: runs.iter().map(|r| r.truncated).sum(),
        wall_time: clock.seconds(),
        iterations: log,
    })
}
