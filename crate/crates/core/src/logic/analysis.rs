use std::collections::BTreeSet;

use super::ast::*;
use super::LogicError;

/// Free path variables of a path formula.
pub fn free_vars_path(f: &PathFormula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_path(f, &mut out);
    out
}

/// Free path variables of a probability expression.
pub fn free_vars_expr(e: &ProbExpr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_expr(e, &mut out);
    out
}

/// Free path variables of a state formula (empty for closed formulas).
pub fn free_vars_state(f: &StateFormula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_state(f, &mut out);
    out
}

fn collect_path(f: &PathFormula, out: &mut BTreeSet<String>) {
    match f {
        PathFormula::True => {}
        PathFormula::Atom { var, .. } | PathFormula::Embed { var, .. } => {
            out.insert(var.clone());
        }
        PathFormula::Not(g) => collect_path(g, out),
        PathFormula::And(a, b) | PathFormula::Until { left: a, right: b, .. } => {
            collect_path(a, out);
            collect_path(b, out);
        }
    }
}

fn collect_expr(e: &ProbExpr, out: &mut BTreeSet<String>) {
    match e {
        ProbExpr::Const(_) => {}
        ProbExpr::Arith { args, .. } => args.iter().for_each(|a| collect_expr(a, out)),
        ProbExpr::Prob { vars, body } => {
            let mut inner = BTreeSet::new();
            match body.as_ref() {
                ProbBody::Path(p) => collect_path(p, &mut inner),
                ProbBody::State(s) => collect_state(s, &mut inner),
            }
            for v in vars {
                inner.remove(v);
            }
            out.extend(inner);
        }
    }
}

fn collect_state(f: &StateFormula, out: &mut BTreeSet<String>) {
    match f {
        StateFormula::Compare { left, right, .. } => {
            collect_expr(left, out);
            collect_expr(right, out);
        }
        StateFormula::InRegion { exprs, .. } => exprs.iter().for_each(|e| collect_expr(e, out)),
    }
}

/// Which verification algorithm a state formula needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// One probability operator over a flat path body, compared to a constant.
    Simple,
    /// Several flat operators combined arithmetically or tested against a region.
    Joint,
    /// A flat formula whose path bodies embed closed flat state formulas.
    NestedState,
    /// `P{X}(inner) ~ c` where `inner` is a flat formula over disjoint variables.
    NestedPath,
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T, LogicError> {
    Err(LogicError::UnsupportedShape(msg.into()))
}

fn contains_eq(f: &StateFormula) -> bool {
    fn in_expr(e: &ProbExpr) -> bool {
        match e {
            ProbExpr::Const(_) => false,
            ProbExpr::Arith { args, .. } => args.iter().any(in_expr),
            ProbExpr::Prob { body, .. } => match body.as_ref() {
                ProbBody::State(s) => contains_eq(s),
                ProbBody::Path(p) => in_path(p),
            },
        }
    }
    fn in_path(p: &PathFormula) -> bool {
        match p {
            PathFormula::True | PathFormula::Atom { .. } => false,
            PathFormula::Embed { state, .. } => contains_eq(state),
            PathFormula::Not(g) => in_path(g),
            PathFormula::And(a, b) | PathFormula::Until { left: a, right: b, .. } => {
                in_path(a) || in_path(b)
            }
        }
    }
    match f {
        StateFormula::Compare { left, op, right } => {
            *op == CmpOp::Eq || in_expr(left) || in_expr(right)
        }
        StateFormula::InRegion { exprs, .. } => exprs.iter().any(in_expr),
    }
}

/// Kind of body below each top-level operator.
#[derive(PartialEq)]
enum BodyKind {
    Flat,
    Embeds,
    Nested,
}

fn body_kind(e: &ProbExpr) -> BodyKind {
    match e {
        ProbExpr::Prob { body, .. } => match body.as_ref() {
            ProbBody::State(_) => BodyKind::Nested,
            ProbBody::Path(p) if p.contains_embed() => BodyKind::Embeds,
            ProbBody::Path(_) => BodyKind::Flat,
        },
        _ => BodyKind::Flat,
    }
}

/// Flat formulas: every operator has a path body without embedded state
/// formulas.
fn flat_shape(f: &StateFormula) -> Result<Shape, LogicError> {
    let probs = f.probs();
    if probs.is_empty() {
        return unsupported("formula contains no probability operator");
    }
    if probs.iter().any(|p| body_kind(p) != BodyKind::Flat) {
        return unsupported("nesting deeper than one level");
    }
    if let StateFormula::Compare { left, right, .. } = f {
        let single = |a: &ProbExpr, b: &ProbExpr| {
            matches!(a, ProbExpr::Prob { .. }) && matches!(b, ProbExpr::Const(_))
        };
        if single(left, right) || single(right, left) {
            return Ok(Shape::Simple);
        }
    }
    Ok(Shape::Joint)
}

/// Decide which algorithm applies, rejecting `=` comparisons and nesting
/// beyond one level.
pub fn classify(f: &StateFormula) -> Result<Shape, LogicError> {
    if contains_eq(f) {
        return unsupported("equality comparisons are not statistically decidable");
    }
    let probs = f.probs();
    if probs.is_empty() {
        return unsupported("formula contains no probability operator");
    }
    let kinds: Vec<BodyKind> = probs.iter().map(|p| body_kind(p)).collect();

    if kinds.contains(&BodyKind::Nested) {
        let StateFormula::Compare { left, right, .. } = f else {
            return unsupported("nested operators inside a region test");
        };
        let outer = match (left, right) {
            (p @ ProbExpr::Prob { .. }, ProbExpr::Const(_))
            | (ProbExpr::Const(_), p @ ProbExpr::Prob { .. }) => p,
            _ => return unsupported("a nested operator must be compared with a constant"),
        };
        let ProbExpr::Prob { vars: outer_vars, body } = outer else { unreachable!() };
        let ProbBody::State(inner) = body.as_ref() else { unreachable!() };
        flat_shape(inner)?;
        for p in inner.probs() {
            if let ProbExpr::Prob { vars, .. } = p {
                if let Some(v) = vars.iter().find(|v| outer_vars.contains(v)) {
                    return unsupported(format!("path variable `{v}` quantified twice"));
                }
            }
        }
        return Ok(Shape::NestedPath);
    }

    if kinds.contains(&BodyKind::Embeds) {
        for p in &probs {
            if let ProbExpr::Prob { body, .. } = p {
                if let ProbBody::Path(path) = body.as_ref() {
                    for st in embedded_states(path) {
                        flat_shape(st)?;
                    }
                }
            }
        }
        return Ok(Shape::NestedState);
    }

    flat_shape(f)
}

/// Embedded state formulas, in order of first appearance.
pub fn embedded_states(f: &PathFormula) -> Vec<&StateFormula> {
    let mut out: Vec<&StateFormula> = Vec::new();
    fn walk<'a>(f: &'a PathFormula, out: &mut Vec<&'a StateFormula>) {
        match f {
            PathFormula::True | PathFormula::Atom { .. } => {}
            PathFormula::Embed { state, .. } => {
                if !out.iter().any(|s| *s == state.as_ref()) {
                    out.push(state);
                }
            }
            PathFormula::Not(g) => walk(g, out),
            PathFormula::And(a, b) | PathFormula::Until { left: a, right: b, .. } => {
                walk(a, out);
                walk(b, out);
            }
        }
    }
    walk(f, &mut out);
    out
}
