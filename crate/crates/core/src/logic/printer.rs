//! Concrete syntax for the AST. Output re-parses to an equal tree.

use std::fmt::{self, Display, Formatter};

use super::ast::*;

const PREC_UNTIL: u8 = 1;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 5;

fn path_prec(f: &PathFormula) -> u8 {
    match f {
        PathFormula::Until { .. } => PREC_UNTIL,
        PathFormula::And(..) => PREC_AND,
        _ => PREC_UNARY,
    }
}

fn write_path(f: &PathFormula, ctx: u8, out: &mut Formatter<'_>) -> fmt::Result {
    let wrap = path_prec(f) < ctx;
    if wrap {
        out.write_str("(")?;
    }
    match f {
        PathFormula::True => out.write_str("true")?,
        PathFormula::Atom { label, var } => write!(out, "{label}@{var}")?,
        PathFormula::Embed { state, var } => write!(out, "({state})@{var}")?,
        PathFormula::Not(g) => {
            out.write_str("!")?;
            write_path(g, PREC_UNARY, out)?;
        }
        PathFormula::And(a, b) => {
            write_path(a, PREC_AND, out)?;
            out.write_str(" & ")?;
            write_path(b, PREC_AND + 1, out)?;
        }
        PathFormula::Until { left, right, lo, hi } => {
            write_path(left, PREC_UNTIL + 1, out)?;
            write!(out, " U{} ", Interval(*lo, *hi))?;
            write_path(right, PREC_UNTIL, out)?;
        }
    }
    if wrap {
        out.write_str(")")?;
    }
    Ok(())
}

struct Interval(f64, f64);

impl Display for Interval {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.1.is_infinite() {
            write!(f, "[{},inf]", self.0)
        } else {
            write!(f, "[{},{}]", self.0, self.1)
        }
    }
}

impl Display for PathFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_path(self, 0, f)
    }
}

fn expr_prec(e: &ProbExpr) -> u8 {
    match e {
        ProbExpr::Arith { op: ArithOp::Add | ArithOp::Sub, .. } => 1,
        ProbExpr::Arith { op: ArithOp::Mul | ArithOp::Div, .. } => 2,
        _ => 3,
    }
}

fn write_expr(e: &ProbExpr, ctx: u8, out: &mut Formatter<'_>) -> fmt::Result {
    let wrap = expr_prec(e) < ctx;
    if wrap {
        out.write_str("(")?;
    }
    match e {
        ProbExpr::Const(v) => write!(out, "{v}")?,
        ProbExpr::Prob { vars, body } => {
            write!(out, "P{{{}}}(", vars.join(","))?;
            match body.as_ref() {
                ProbBody::Path(p) => write!(out, "{p}")?,
                ProbBody::State(s) => write!(out, "{s}")?,
            }
            out.write_str(")")?;
        }
        ProbExpr::Arith { op, args } => match op {
            ArithOp::Abs => {
                out.write_str("abs(")?;
                write_expr(&args[0], 0, out)?;
                out.write_str(")")?;
            }
            ArithOp::Min | ArithOp::Max => {
                out.write_str(if *op == ArithOp::Min { "min(" } else { "max(" })?;
                write_expr(&args[0], 0, out)?;
                out.write_str(", ")?;
                write_expr(&args[1], 0, out)?;
                out.write_str(")")?;
            }
            _ => {
                let (sym, p) = match op {
                    ArithOp::Add => ("+", 1),
                    ArithOp::Sub => ("-", 1),
                    ArithOp::Mul => ("*", 2),
                    _ => ("/", 2),
                };
                write_expr(&args[0], p, out)?;
                write!(out, " {sym} ")?;
                write_expr(&args[1], p + 1, out)?;
            }
        },
    }
    if wrap {
        out.write_str(")")?;
    }
    Ok(())
}

impl Display for ProbExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(self, 0, f)
    }
}

impl Display for StateFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::Compare { left, op, right } => {
                write!(f, "{left} {} {right}", op.symbol())
            }
            StateFormula::InRegion { exprs, region } => {
                f.write_str("(")?;
                for (k, e) in exprs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ") in {region}")
            }
        }
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Formula::State(s) => s.fmt(f),
            Formula::Path(p) => p.fmt(f),
        }
    }
}
