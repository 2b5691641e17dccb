//! Direct transliteration of the until semantics on integer-grid traces,
//! used as an independent oracle for the evaluator.
//!
//! Point `k` of a trace with `n` points carries the label set `k`; the
//! trace is observed on `[0, n - 1/2]`, so integers from `n` on are
//! unobserved. Truth values are three-valued: `None` means the value
//! depends on unobserved points.

use std::collections::BTreeMap;
use std::sync::Arc;

use hyperpstl::logic::PathFormula;
use hyperpstl::semantics::{Trace, TraceBuilder, TraceKind};
use rand::Rng;

pub type Tri = Option<bool>;

/// Label sets per grid point, per path variable.
pub type Grid = BTreeMap<String, Vec<Vec<String>>>;

fn and(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

/// Value of `f` at integer time `t` on traces with `n` points each.
pub fn eval(f: &PathFormula, grid: &Grid, n: i64, t: i64) -> Tri {
    match f {
        PathFormula::True => Some(true),
        PathFormula::Atom { label, var } => {
            if t >= n {
                None
            } else {
                Some(grid[var][t as usize].iter().any(|l| l == label))
            }
        }
        PathFormula::Not(g) => eval(g, grid, n, t).map(|b| !b),
        PathFormula::And(a, b) => and(eval(a, grid, n, t), eval(b, grid, n, t)),
        PathFormula::Until { left, right, lo, hi } => {
            assert!(lo.fract() == 0.0 && (hi.is_infinite() || hi.fract() == 0.0), "integer bounds");
            // exists w in [t+lo, t+hi] with right at w and left on [t, w)
            let first = t + *lo as i64;
            let last = if hi.is_infinite() { i64::MAX } else { t + *hi as i64 };
            let mut acc = Some(false);
            for w in first..=last.min(n - 1) {
                let mut prefix = Some(true);
                for s in t..w {
                    prefix = and(prefix, eval(left, grid, n, s));
                }
                acc = or(acc, and(prefix, eval(right, grid, n, w)));
            }
            if last >= n {
                // witnesses past the last observed point
                let mut prefix = Some(true);
                for s in t..n {
                    prefix = and(prefix, eval(left, grid, n, s));
                }
                acc = or(acc, and(prefix, None));
            }
            acc
        }
        PathFormula::Embed { .. } => panic!("embedded state formulas are not path formulas"),
    }
}

/// Random label sets on `n` grid points for each variable.
pub fn random_grid<R: Rng>(rng: &mut R, vars: &[&str], labels: &[&str], n: usize) -> Grid {
    let density = rng.random_range(0.1..0.9);
    vars.iter()
        .map(|v| {
            let points = (0..n)
                .map(|_| labels.iter().filter(|_| rng.random_bool(density)).map(|l| l.to_string()).collect())
                .collect();
            (v.to_string(), points)
        })
        .collect()
}

/// The grid of one variable as a fixed-grid trace with step 1.
pub fn to_trace(points: &[Vec<String>], labels: &[&str]) -> Trace {
    let names: Arc<[String]> = labels.iter().map(|l| l.to_string()).collect();
    let mut b = TraceBuilder::new(names, Arc::from(Vec::new()), TraceKind::FixedGrid { dt: 1.0 });
    for (k, set) in points.iter().enumerate() {
        let bits = labels.iter().enumerate().filter(|(_, l)| set.iter().any(|s| s == *l)).fold(0u64, |m, (i, _)| m | 1 << i);
        b.push(k as f64, bits, &[]);
    }
    b.finish(points.len() as f64 - 0.5).expect("valid grid trace")
}
