use crate::logic::{free_vars_path, PathFormula};

use super::trace::Trace;
use super::EvalError;

/// Tolerance for comparing time points.
pub const TIME_EPS: f64 = 1e-9;

/// Binding of path variables to traces, plus a time shift applied to every
/// lookup.
#[derive(Debug, Clone, Default)]
pub struct PathAssignment<'a> {
    bindings: Vec<(String, &'a Trace)>,
    base_shift: f64,
}

impl<'a> PathAssignment<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bind `var`, replacing an existing binding of the same name.
    pub fn bind(mut self, var: impl Into<String>, trace: &'a Trace) -> Self {
        let var = var.into();
        self.bindings.retain(|(v, _)| *v != var);
        self.bindings.push((var, trace));
        self
    }

    /// The same assignment observed `dt` later.
    pub fn shift(&self, dt: f64) -> Self {
        Self { bindings: self.bindings.clone(), base_shift: self.base_shift + dt }
    }

    pub fn base_shift(&self) -> f64 {
        self.base_shift
    }

    pub fn get(&self, var: &str) -> Option<&'a Trace> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, t)| *t)
    }

    /// Smallest horizon among the bound traces.
    pub fn horizon(&self) -> f64 {
        self.bindings
            .iter()
            .map(|(_, t)| t.horizon())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Kleene truth value; `Unknown` means the answer depends on time beyond
/// the observed horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::False => Tri::True,
            Tri::True => Tri::False,
            Tri::Unknown => Tri::Unknown,
        }
    }

    fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    fn or(self, other: Tri) -> Tri {
        self.not().and(other.not()).not()
    }
}

/// Formula with atoms resolved to (trace slot, label mask).
enum Node {
    True,
    Atom { slot: usize, mask: u64 },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Until { left: Box<Node>, right: Box<Node>, lo: f64, hi: f64 },
}

struct Ctx<'a> {
    traces: Vec<&'a Trace>,
    boundaries: Vec<f64>,
    horizon: f64,
}

fn compile<'a>(
    f: &PathFormula,
    v: &PathAssignment<'a>,
    slots: &mut Vec<(String, &'a Trace)>,
) -> Result<Node, EvalError> {
    Ok(match f {
        PathFormula::True => Node::True,
        PathFormula::Atom { label, var } => {
            let trace = v.get(var).ok_or_else(|| EvalError::UnboundVariable(var.clone()))?;
            let bit = trace.label_index(label).ok_or_else(|| EvalError::UnknownLabel {
                label: label.clone(),
                var: var.clone(),
            })?;
            let slot = match slots.iter().position(|(n, _)| n == var) {
                Some(k) => k,
                None => {
                    slots.push((var.clone(), trace));
                    slots.len() - 1
                }
            };
            Node::Atom { slot, mask: 1u64 << bit }
        }
        PathFormula::Embed { .. } => return Err(EvalError::UnresolvedStateFormula),
        PathFormula::Not(g) => Node::Not(Box::new(compile(g, v, slots)?)),
        PathFormula::And(a, b) => {
            Node::And(Box::new(compile(a, v, slots)?), Box::new(compile(b, v, slots)?))
        }
        PathFormula::Until { left, right, lo, hi } => Node::Until {
            left: Box::new(compile(left, v, slots)?),
            right: Box::new(compile(right, v, slots)?),
            lo: *lo,
            hi: *hi,
        },
    })
}

impl Ctx<'_> {
    fn eval(&self, node: &Node, t: f64) -> Tri {
        match node {
            Node::True => Tri::True,
            Node::Atom { slot, mask } => {
                if t > self.horizon + TIME_EPS {
                    return Tri::Unknown;
                }
                let trace = self.traces[*slot];
                match trace.segment_at(t, TIME_EPS) {
                    Some(i) if trace.label_bits(i) & mask != 0 => Tri::True,
                    Some(_) => Tri::False,
                    None => Tri::Unknown,
                }
            }
            Node::Not(g) => self.eval(g, t).not(),
            Node::And(a, b) => match self.eval(a, t) {
                Tri::False => Tri::False,
                x => x.and(self.eval(b, t)),
            },
            Node::Until { left, right, lo, hi } => self.until(left, right, t, *lo, *hi),
        }
    }

    /// Sweep the candidate points of `left U[lo,hi] right` at time `s`.
    ///
    /// Witnesses are `s + lo`, `s + hi` and every boundary in between; the
    /// left operand must hold at `s` and at every boundary strictly before
    /// the witness.
    fn until(&self, left: &Node, right: &Node, s: f64, lo: f64, hi: f64) -> Tri {
        let (w_lo, w_hi) = (s + lo, s + hi);
        let b_from = self.boundaries.partition_point(|&b| b <= s + TIME_EPS);
        let b_to = self.boundaries.partition_point(|&b| b <= w_hi + TIME_EPS);
        let bounds = &self.boundaries[b_from..b_to];

        let mut extra = [s, w_lo, w_hi];
        let n_extra = if w_hi.is_finite() { 3 } else { 2 };
        extra[..n_extra].sort_by(f64::total_cmp);
        let extra = &extra[..n_extra];

        let (mut i, mut j) = (0, 0);
        let mut acc = Tri::False;
        let mut prefix = Tri::True;
        loop {
            // next point: smallest of the two streams, merging near-equal ones
            let next_b = bounds.get(i).copied();
            let next_x = extra.get(j).copied();
            let w = match (next_b, next_x) {
                (None, None) => break,
                (Some(b), None) => b,
                (None, Some(x)) => x,
                (Some(b), Some(x)) => b.min(x),
            };
            let mut is_prefix = false;
            while i < bounds.len() && bounds[i] <= w + TIME_EPS {
                is_prefix = true;
                i += 1;
            }
            while j < extra.len() && extra[j] <= w + TIME_EPS {
                if extra[j] == s {
                    is_prefix = true;
                }
                j += 1;
            }
            if w > self.horizon + TIME_EPS || w > w_hi + TIME_EPS {
                break;
            }
            if w >= w_lo - TIME_EPS {
                acc = acc.or(prefix.and(self.eval(right, w)));
                if acc == Tri::True {
                    return Tri::True;
                }
            }
            if w >= w_hi - TIME_EPS {
                break;
            }
            if is_prefix {
                prefix = prefix.and(self.eval(left, w));
                if prefix == Tri::False {
                    return acc;
                }
            }
        }
        if w_hi > self.horizon + TIME_EPS {
            acc.or(prefix.and(Tri::Unknown))
        } else {
            acc
        }
    }
}

fn evaluate(f: &PathFormula, v: &PathAssignment<'_>, t: f64) -> Result<Tri, EvalError> {
    let mut slots = Vec::new();
    let node = compile(f, v, &mut slots)?;
    let traces: Vec<&Trace> = slots.iter().map(|(_, tr)| *tr).collect();
    let boundaries = if traces.len() == 1 {
        traces[0].starts().to_vec()
    } else {
        let mut b: Vec<f64> = traces.iter().flat_map(|tr| tr.starts().iter().copied()).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    };
    let horizon = traces.iter().map(|tr| tr.horizon()).fold(f64::INFINITY, f64::min);
    let ctx = Ctx { traces, boundaries, horizon };
    Ok(ctx.eval(&node, v.base_shift() + t))
}

/// Truth of `f` at time `t` (relative to the assignment's shift).
///
/// Errors with [`EvalError::HorizonExceeded`] when the answer depends on
/// time beyond the shortest bound trace.
pub fn eval_path(f: &PathFormula, v: &PathAssignment<'_>, t: f64) -> Result<bool, EvalError> {
    match evaluate(f, v, t)? {
        Tri::True => Ok(true),
        Tri::False => Ok(false),
        Tri::Unknown => Err(EvalError::HorizonExceeded { horizon: v.horizon() }),
    }
}

/// Truth of a quantifier-free formula at time 0, binding `order[k]` to
/// `traces[k]`.
pub fn eval_quantifier_free(
    f: &PathFormula,
    traces: &[&Trace],
    order: &[String],
) -> Result<bool, EvalError> {
    if traces.len() != order.len() {
        return Err(EvalError::ArityMismatch { expected: order.len(), got: traces.len() });
    }
    let mut v = PathAssignment::new();
    for (name, tr) in order.iter().zip(traces) {
        v = v.bind(name.clone(), tr);
    }
    if let Some(var) = free_vars_path(f).into_iter().find(|x| v.get(x).is_none()) {
        return Err(EvalError::UnboundVariable(var));
    }
    eval_path(f, &v, 0.0)
}
