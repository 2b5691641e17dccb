//! Sample-path semantics: traces, path assignments and Boolean evaluation.
//!
//! Dense time is discretised. For `phi U[t1,t2] psi` evaluated at `s`, the
//! candidate witnesses are `s + t1`, `s + t2` and every segment start of the
//! bound traces inside `[s + t1, s + t2]`; `phi` is checked at `s` and at every
//! segment start in `(s, w)`. For flat formulas over piecewise-constant traces
//! this is exact.
//!
//! Truth is three-valued internally. A formula whose value still depends on
//! time past the horizon evaluates to [`EvalError::HorizonExceeded`].

mod eval;
mod trace;

pub use eval::{eval_path, eval_quantifier_free, PathAssignment, TIME_EPS};
pub use trace::{SegmentDocument, Trace, TraceBuilder, TraceDocument, TraceKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("evaluation needs the trace beyond its horizon {horizon}")]
    HorizonExceeded { horizon: f64 },
    #[error("path variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("label `{label}` is not defined on the trace bound to `{var}`")]
    UnknownLabel { label: String, var: String },
    #[error("embedded state formulas must be replaced by labels before evaluation")]
    UnresolvedStateFormula,
    #[error("formula expects {expected} paths, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
}
