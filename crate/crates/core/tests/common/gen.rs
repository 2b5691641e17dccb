//! Random formulas for property tests.

use hyperpstl::logic::{free_vars_path, free_vars_state, ArithOp, CmpOp, PathFormula, ProbBody, ProbExpr, StateFormula};
use rand::seq::IndexedRandom;
use rand::Rng;

const LABELS: [&str; 3] = ["a", "b", "q1"];
const CONSTS: [f64; 6] = [0.0, 0.05, 0.25, 0.5, 0.9, 1.0];
const FRESH: [&str; 6] = ["x", "y", "z", "w", "pi1", "pi2"];

fn interval<R: Rng>(rng: &mut R, integral: bool) -> (f64, f64) {
    if integral {
        let lo = rng.random_range(0..4) as f64;
        let hi = if rng.random_bool(0.2) { f64::INFINITY } else { lo + rng.random_range(1..8) as f64 };
        (lo, hi)
    } else {
        let lo = *[0.0, 0.5, 1.0, 2.25].choose(rng).unwrap();
        let hi = if rng.random_bool(0.25) { f64::INFINITY } else { lo + *[0.5, 1.0, 3.0].choose(rng).unwrap() };
        (lo, hi)
    }
}

/// Path formula over `vars` (non-empty) and labels `labels`, with integer
/// interval bounds and no embedded state formulas.
pub fn grid_path<R: Rng>(rng: &mut R, depth: usize, vars: &[&str], labels: &[&str]) -> PathFormula {
    let leaf = depth <= 1 || rng.random_bool(0.25);
    if leaf {
        return if rng.random_bool(0.1) {
            PathFormula::True
        } else {
            PathFormula::atom(*labels.choose(rng).unwrap(), *vars.choose(rng).unwrap())
        };
    }
    match rng.random_range(0..3) {
        0 => PathFormula::not(grid_path(rng, depth - 1, vars, labels)),
        1 => PathFormula::and(grid_path(rng, depth - 1, vars, labels), grid_path(rng, depth - 1, vars, labels)),
        _ => {
            let (lo, hi) = interval(rng, true);
            PathFormula::until(grid_path(rng, depth - 1, vars, labels), grid_path(rng, depth - 1, vars, labels), lo, hi)
        }
    }
}

/// Any path formula over `vars` (non-empty), possibly embedding closed
/// state formulas.
pub fn path<R: Rng>(rng: &mut R, depth: usize, vars: &[String]) -> PathFormula {
    let leaf = depth <= 1 || rng.random_bool(0.25);
    if leaf {
        return match rng.random_range(0..10) {
            0 => PathFormula::True,
            1 if depth >= 3 => PathFormula::Embed {
                state: Box::new(state(rng, depth - 1, &[])),
                var: vars.choose(rng).unwrap().clone(),
            },
            _ => PathFormula::atom(*LABELS.choose(rng).unwrap(), vars.choose(rng).unwrap().clone()),
        };
    }
    match rng.random_range(0..3) {
        0 => PathFormula::not(path(rng, depth - 1, vars)),
        1 => PathFormula::and(path(rng, depth - 1, vars), path(rng, depth - 1, vars)),
        _ => {
            let (lo, hi) = interval(rng, false);
            PathFormula::until(path(rng, depth - 1, vars), path(rng, depth - 1, vars), lo, hi)
        }
    }
}

fn has_prob(e: &ProbExpr) -> bool {
    !e.probs().is_empty()
}

/// Probability expression; `scope` holds variables bound by enclosing
/// operators.
pub fn expr<R: Rng>(rng: &mut R, depth: usize, scope: &[String]) -> ProbExpr {
    if depth <= 2 || rng.random_bool(0.4) {
        if depth <= 1 || rng.random_bool(0.3) {
            return ProbExpr::Const(*CONSTS.choose(rng).unwrap());
        }
        let fresh: Vec<&str> = FRESH.iter().copied().filter(|v| !scope.iter().any(|s| s == v)).collect();
        let k = rng.random_range(1..=2.min(fresh.len()));
        let own: Vec<String> = fresh.choose_multiple(rng, k).map(|v| v.to_string()).collect();
        let mut all = scope.to_vec();
        all.extend(own.iter().cloned());
        // every quantified variable must occur in the body
        if depth >= 3 && rng.random_bool(0.2) {
            let body = state(rng, depth - 1, &all);
            let fv = free_vars_state(&body);
            let used: Vec<String> = own.iter().filter(|v| fv.contains(*v)).cloned().collect();
            if !used.is_empty() {
                return ProbExpr::Prob { vars: used, body: Box::new(ProbBody::State(body)) };
            }
        }
        let mut body = path(rng, depth - 1, &all);
        let fv = free_vars_path(&body);
        for v in own.iter().filter(|v| !fv.contains(*v)) {
            body = PathFormula::and(body, PathFormula::atom(*LABELS.choose(rng).unwrap(), v.clone()));
        }
        return ProbExpr::Prob { vars: own, body: Box::new(ProbBody::Path(body)) };
    }
    let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Abs, ArithOp::Min, ArithOp::Max]
        .choose(rng)
        .unwrap();
    if op == ArithOp::Abs {
        return ProbExpr::arith(op, vec![expr(rng, depth - 1, scope)]);
    }
    let a = expr(rng, depth - 1, scope);
    let mut b = expr(rng, depth - 1, scope);
    let folds = matches!(op, ArithOp::Add | ArithOp::Sub | ArithOp::Mul | ArithOp::Div);
    // the parser folds arithmetic on two constants
    while folds && !has_prob(&a) && !has_prob(&b) {
        b = expr(rng, depth - 1, scope);
    }
    ProbExpr::arith(op, vec![a, b])
}

/// State formula whose free variables are within `scope`.
pub fn state<R: Rng>(rng: &mut R, depth: usize, scope: &[String]) -> StateFormula {
    let depth = depth.max(2);
    if rng.random_bool(0.15) {
        let n = rng.random_range(1..=3);
        let exprs = (0..n).map(|_| expr(rng, depth - 1, scope)).collect();
        return StateFormula::InRegion { exprs, region: ["D", "R1"].choose(rng).unwrap().to_string() };
    }
    let op = *[CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Eq].choose(rng).unwrap();
    StateFormula::compare(expr(rng, depth - 1, scope), op, expr(rng, depth - 1, scope))
}
