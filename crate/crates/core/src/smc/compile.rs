//! Turning a flat state formula into probability operators plus a target
//! region of `[0, 1]^n`.
//!
//! A comparison `L op R` becomes `f <= 0` with `f = L - R` (or `R - L`).
//! `abs`, `min` and `max` are split away without case guards: if `f`
//! contains `s * max(a, b)` with `s > 0` then `f <= 0` holds iff it holds
//! with `a` and with `b` in its place; with `s < 0`, iff it holds for either.
//! `min` is the mirror image and `abs(a)` is `max(a, -a)`. What remains is
//! affine and yields one halfspace. Products and quotients are accepted only
//! when one factor is constant.

use std::collections::BTreeMap;

use super::SmcError;
use crate::logic::{ArithOp, CmpOp, LogicError, PathFormula, ProbBody, ProbExpr, StateFormula};
use crate::stats::{Halfspace, Region};

/// A probability operator `P{vars}(body)` with a quantifier-free body.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub vars: Vec<String>,
    pub body: PathFormula,
    /// Printed form, used in reports.
    pub text: String,
}

impl Operator {
    fn from_expr(e: &ProbExpr) -> Result<Self, SmcError> {
        match e {
            ProbExpr::Prob { vars, body } => match body.as_ref() {
                ProbBody::Path(p) => Ok(Operator { vars: vars.clone(), body: p.clone(), text: e.to_string() }),
                ProbBody::State(_) => Err(unsupported("nested operator where a flat one is required")),
            },
            _ => Err(unsupported("expected a probability operator")),
        }
    }
}

fn unsupported(msg: impl Into<String>) -> SmcError {
    SmcError::Logic(LogicError::UnsupportedShape(msg.into()))
}

/// Operators (duplicates in a comparison share one index) and the region
/// the vector of their probabilities must fall into.
pub fn compile_flat(
    f: &StateFormula,
    regions: &BTreeMap<String, Region>,
) -> Result<(Vec<Operator>, Region), SmcError> {
    match f {
        StateFormula::InRegion { exprs, region } => {
            let ops = exprs.iter().map(Operator::from_expr).collect::<Result<Vec<_>, _>>()?;
            let r = regions.get(region).ok_or_else(|| SmcError::UnknownRegion(region.clone()))?;
            if r.dim() != ops.len() {
                return Err(SmcError::RegionDimension { name: region.clone(), dim: r.dim(), given: ops.len() });
            }
            Ok((ops, r.clone()))
        }
        StateFormula::Compare { left, op, right } => {
            let mut probs: Vec<&ProbExpr> = Vec::new();
            for p in f.probs() {
                if !probs.contains(&p) {
                    probs.push(p);
                }
            }
            if probs.is_empty() {
                return Err(unsupported("formula contains no probability operator"));
            }
            let ops = probs.iter().map(|p| Operator::from_expr(p)).collect::<Result<Vec<_>, _>>()?;
            let dim = ops.len();
            let l = Pwl::from_expr(left, &probs)?;
            let r = Pwl::from_expr(right, &probs)?;
            let diff = match op {
                CmpOp::Lt | CmpOp::Le => Pwl::sub(l, r),
                CmpOp::Gt | CmpOp::Ge => Pwl::sub(r, l),
                CmpOp::Eq => return Err(unsupported("equality comparisons are not statistically decidable")),
            };
            let terms = diff.nonpositive(dim);
            let region = if terms.len() == 1 {
                Region::HalfspaceConj { dim, halfspaces: terms.into_iter().next().unwrap() }
            } else {
                Region::Dnf { dim, terms }
            };
            Ok((ops, region))
        }
    }
}

/// Piecewise-linear expression over the probability vector.
#[derive(Debug, Clone)]
enum Pwl {
    /// `coeffs . x + constant`.
    Affine(Vec<f64>, f64),
    Sum(Box<Pwl>, Box<Pwl>),
    Scale(f64, Box<Pwl>),
    Max(Box<Pwl>, Box<Pwl>),
    Min(Box<Pwl>, Box<Pwl>),
}

impl Pwl {
    fn from_expr(e: &ProbExpr, probs: &[&ProbExpr]) -> Result<Self, SmcError> {
        let dim = probs.len();
        Ok(match e {
            ProbExpr::Prob { .. } => {
                let k = probs.iter().position(|p| *p == e).expect("operator was collected");
                let mut c = vec![0.0; dim];
                c[k] = 1.0;
                Pwl::Affine(c, 0.0)
            }
            ProbExpr::Const(v) => Pwl::Affine(vec![0.0; dim], *v),
            ProbExpr::Arith { op, args } => {
                let mut a = args.iter().map(|x| Self::from_expr(x, probs)).collect::<Result<Vec<_>, _>>()?;
                if a.len() != op.arity() {
                    return Err(unsupported(format!("{op:?} takes {} arguments", op.arity())));
                }
                let b = if a.len() == 2 { a.pop() } else { None };
                let a = a.pop().unwrap();
                match (op, b) {
                    (ArithOp::Abs, None) => {
                        let neg = Pwl::Scale(-1.0, Box::new(a.clone()));
                        Pwl::Max(Box::new(a), Box::new(neg))
                    }
                    (ArithOp::Add, Some(b)) => Pwl::Sum(Box::new(a), Box::new(b)),
                    (ArithOp::Sub, Some(b)) => Pwl::sub(a, b),
                    (ArithOp::Min, Some(b)) => Pwl::Min(Box::new(a), Box::new(b)),
                    (ArithOp::Max, Some(b)) => Pwl::Max(Box::new(a), Box::new(b)),
                    (ArithOp::Mul, Some(b)) => match (a.constant(), b.constant()) {
                        (Some(k), _) => Pwl::Scale(k, Box::new(b)),
                        (_, Some(k)) => Pwl::Scale(k, Box::new(a)),
                        _ => return Err(unsupported("product of two probability expressions")),
                    },
                    (ArithOp::Div, Some(b)) => match b.constant() {
                        Some(k) if k != 0.0 => Pwl::Scale(1.0 / k, Box::new(a)),
                        Some(_) => return Err(unsupported("division by zero")),
                        None => return Err(unsupported("division by a probability expression")),
                    },
                    _ => unreachable!("arity checked"),
                }
            }
        })
    }

    fn sub(a: Pwl, b: Pwl) -> Pwl {
        Pwl::Sum(Box::new(a), Box::new(Pwl::Scale(-1.0, Box::new(b))))
    }

    /// Value when the expression does not depend on any probability.
    fn constant(&self) -> Option<f64> {
        match self {
            Pwl::Affine(c, k) => c.iter().all(|v| *v == 0.0).then_some(*k),
            Pwl::Sum(a, b) => Some(a.constant()? + b.constant()?),
            Pwl::Scale(k, a) => {
                if *k == 0.0 {
                    Some(0.0)
                } else {
                    Some(k * a.constant()?)
                }
            }
            Pwl::Max(a, b) => Some(a.constant()?.max(b.constant()?)),
            Pwl::Min(a, b) => Some(a.constant()?.min(b.constant()?)),
        }
    }

    /// Split off the first `max`/`min`, reached with overall sign `sign`.
    /// Returns whether the two resulting conditions must both hold, and the
    /// two expressions.
    fn split(&self, sign: f64) -> Option<(bool, Pwl, Pwl)> {
        match self {
            Pwl::Affine(..) => None,
            Pwl::Scale(k, a) => {
                if *k == 0.0 {
                    return None;
                }
                let (both, x, y) = a.split(sign * k.signum())?;
                Some((both, Pwl::Scale(*k, Box::new(x)), Pwl::Scale(*k, Box::new(y))))
            }
            Pwl::Sum(a, b) => {
                if let Some((both, x, y)) = a.split(sign) {
                    Some((both, Pwl::Sum(Box::new(x), b.clone()), Pwl::Sum(Box::new(y), b.clone())))
                } else {
                    let (both, x, y) = b.split(sign)?;
                    Some((both, Pwl::Sum(a.clone(), Box::new(x)), Pwl::Sum(a.clone(), Box::new(y))))
                }
            }
            Pwl::Max(a, b) => Some((sign > 0.0, (**a).clone(), (**b).clone())),
            Pwl::Min(a, b) => Some((sign < 0.0, (**a).clone(), (**b).clone())),
        }
    }

    fn affine(&self, dim: usize) -> (Vec<f64>, f64) {
        match self {
            Pwl::Affine(c, k) => (c.clone(), *k),
            Pwl::Sum(a, b) => {
                let (ca, ka) = a.affine(dim);
                let (cb, kb) = b.affine(dim);
                (ca.iter().zip(&cb).map(|(x, y)| x + y).collect(), ka + kb)
            }
            Pwl::Scale(k, a) => {
                if *k == 0.0 {
                    return (vec![0.0; dim], 0.0);
                }
                let (c, v) = a.affine(dim);
                (c.iter().map(|x| k * x).collect(), k * v)
            }
            Pwl::Max(..) | Pwl::Min(..) => unreachable!("split before linearising"),
        }
    }

    /// `{x : self(x) <= 0}` as a union of halfspace conjunctions.
    fn nonpositive(&self, dim: usize) -> Vec<Vec<Halfspace>> {
        if let Some((both, a, b)) = self.split(1.0) {
            let ta = a.nonpositive(dim);
            let tb = b.nonpositive(dim);
            if both {
                let mut out = Vec::with_capacity(ta.len() * tb.len());
                for x in &ta {
                    for y in &tb {
                        out.push(x.iter().chain(y).cloned().collect());
                    }
                }
                out
            } else {
                ta.into_iter().chain(tb).collect()
            }
        } else {
            let (c, k) = self.affine(dim);
            if c.iter().all(|v| *v == 0.0) {
                // A constant condition: everywhere (no constraint) or nowhere.
                if -k > 0.0 {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            } else {
                vec![vec![Halfspace::new(c, -k)]]
            }
        }
    }
}
