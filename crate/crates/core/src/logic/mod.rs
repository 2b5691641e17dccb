//! HyperPSTL syntax: AST, parser, printer, free variables, classification.
//!
//! Formula text follows this grammar (`#` starts a line comment):
//!
//! ```text
//! state    := cmp | "(" probexpr {"," probexpr} ")" "in" IDENT
//! cmp      := probexpr OP probexpr          OP := < > <= >= =
//! probexpr := "P" "{" IDENT {"," IDENT} "}" "(" (path | state) ")"
//!           | NUMBER | "abs" "(" probexpr ")" | ("min"|"max") "(" probexpr "," probexpr ")"
//!           | probexpr (+ - * /) probexpr | "(" probexpr ")"
//! path     := IDENT "@" IDENT | "true" | "false" | "!" path | path "&" path
//!           | path "|" path | path "->" path | path "U" intv path
//!           | "F" intv path | "G" intv path | "(" path ")" | "(" state ")" "@" IDENT
//! intv     := "[" NUMBER "," (NUMBER | "inf") "]"
//! ```
//!
//! Binding strength, tightest first: `! F G`, `&`, `|`, `->`, `U`.
//! `&` and `|` associate to the left, `->` and `U` to the right.

mod analysis;
mod ast;
mod parser;
mod printer;

pub use analysis::{classify, embedded_states, free_vars_expr, free_vars_path, free_vars_state, Shape};
pub use ast::*;
pub use parser::{parse_formula, parse_state_formula};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unbound path variable `{0}`")]
    UnboundPathVariable(String),
    #[error("invalid interval [{lo}, {hi}]: need 0 <= lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("quantified path variables {0:?} do not occur in the operator body")]
    VacuousQuantifier(Vec<String>),
    #[error("unsupported formula shape: {0}")]
    UnsupportedShape(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(src: &str) -> StateFormula {
        parse_state_formula(src).unwrap()
    }

    #[test]
    fn simple_until() {
        let f = state("P{pi} (a@pi U[0,5] b@pi) < 0.3");
        let want = StateFormula::compare(
            ProbExpr::prob(&["pi"], PathFormula::until(
                PathFormula::atom("a", "pi"),
                PathFormula::atom("b", "pi"),
                0.0,
                5.0,
            )),
            CmpOp::Lt,
            ProbExpr::Const(0.3),
        );
        assert_eq!(f, want);
        assert_eq!(classify(&f).unwrap(), Shape::Simple);
    }

    #[test]
    fn globally_desugars() {
        let f = state("P{pi} (G[0,inf] a@pi) >= 1");
        let StateFormula::Compare { left: ProbExpr::Prob { body, .. }, .. } = f else {
            panic!()
        };
        let want = PathFormula::not(PathFormula::until(
            PathFormula::True,
            PathFormula::not(PathFormula::atom("a", "pi")),
            0.0,
            f64::INFINITY,
        ));
        assert_eq!(*body, ProbBody::Path(want));
    }

    #[test]
    fn nested_path_shape() {
        let f = state("P{pi1}(P{pi2}(a@pi1 U[0,5] b@pi2) < 0.5) < 0.1");
        assert_eq!(classify(&f).unwrap(), Shape::NestedPath);
        assert!(free_vars_state(&f).is_empty());
    }

    #[test]
    fn joint_and_region_shapes() {
        let f = state("P{p}(F[0,1] a@p) - P{q}(F[0,1] b@q) > 0.05");
        assert_eq!(classify(&f).unwrap(), Shape::Joint);
        let f = state("(P{p}(F[0,1] a@p), P{q}(F[0,1] b@q)) in D");
        assert_eq!(classify(&f).unwrap(), Shape::Joint);
    }

    #[test]
    fn nested_state_shape() {
        let f = state("P{p}(F[0,2] (P{q}(F[0,1] a@q) > 0.5)@p) > 0.2");
        assert_eq!(classify(&f).unwrap(), Shape::NestedState);
    }

    #[test]
    fn rejects_unbound_variable() {
        let err = parse_state_formula("P{pi1} (a@pi1 U[0,1] b@pi2) < 0.5").unwrap_err();
        assert_eq!(err, LogicError::UnboundPathVariable("pi2".into()));
    }

    #[test]
    fn rejects_bad_interval() {
        let err = parse_state_formula("P{p} (a@p U[3,1] b@p) < 0.5").unwrap_err();
        assert!(matches!(err, LogicError::InvalidInterval { .. }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_state_formula("P{p} (a@p U[0,1] b@p)\n  < < 0.5").unwrap_err();
        match err {
            LogicError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_triple_nesting_rejected() {
        let f = state("P{p}(F[0,1] a@p) = 0.5");
        assert!(matches!(classify(&f), Err(LogicError::UnsupportedShape(_))));
        let f = state("P{a}(P{b}(P{c}(x@a & x@b & x@c) < 0.5) < 0.5) < 0.5");
        assert!(matches!(classify(&f), Err(LogicError::UnsupportedShape(_))));
    }

    #[test]
    fn comments_and_path_formulas() {
        let f = parse_formula("# a comment\na@x & F[0,2] b@y # trailing\n").unwrap();
        let Formula::Path(p) = f else { panic!() };
        assert_eq!(free_vars_path(&p).len(), 2);
    }

    #[test]
    fn constant_thresholds_fold() {
        let f = state("P{p}(F[0,1] a@p) >= 1-0.05");
        let StateFormula::Compare { right, .. } = &f else { panic!() };
        assert_eq!(*right, ProbExpr::Const(1.0 - 0.05));
        assert_eq!(classify(&f).unwrap(), Shape::Simple);
    }

    #[test]
    fn printer_round_trip_examples() {
        for src in [
            "P{pi1,pi2}((!q@pi1 & !q@pi2) U[0,inf] (q@pi1 & F[0,0.9] q@pi2 | q@pi2 & F[0,0.9] q@pi1)) >= 0.95",
            "P{pi1}(abs(P{pi2}((!q1@pi1 & !q2@pi2) U[0,inf] (q1@pi1 & F[5,inf] q2@pi2)) - P{pi2}((!q1@pi1 & !q2@pi2) U[0,inf] (q2@pi2 & F[5,inf] q1@pi1))) <= 0.5) >= 0.5",
            "(P{p}(a@p), min(P{q}(b@q), 0.3) * 2) in D",
            "P{p}(F[0,2] (P{q}(F[0,1] a@q) > 0.5)@p) > -0.2 + 1",
            "P{p}(a@p -> b@p U[1,2] c@p U[0,3] d@p) < 0.5",
        ] {
            let f = parse_formula(src).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_formula(&printed).unwrap(), f, "{printed}");
        }
    }
}
