/// Path formula over one or more path variables.
///
/// `Or`, `Implies`, `F` and `G` are not separate nodes; the parser rewrites
/// them with `Not`, `And` and `Until`.
#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    True,
    /// Atomic proposition `label` on the path bound to `var`.
    Atom { label: String, var: String },
    /// Closed state formula evaluated at the current state of `var`.
    Embed { state: Box<StateFormula>, var: String },
    Not(Box<PathFormula>),
    And(Box<PathFormula>, Box<PathFormula>),
    /// Bounded until `left U[lo,hi] right`; `hi` may be `f64::INFINITY`.
    Until {
        left: Box<PathFormula>,
        right: Box<PathFormula>,
        lo: f64,
        hi: f64,
    },
}

impl PathFormula {
    pub fn atom(label: impl Into<String>, var: impl Into<String>) -> Self {
        PathFormula::Atom { label: label.into(), var: var.into() }
    }

    pub fn not(f: PathFormula) -> Self {
        PathFormula::Not(Box::new(f))
    }

    pub fn and(a: PathFormula, b: PathFormula) -> Self {
        PathFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PathFormula, b: PathFormula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn implies(a: PathFormula, b: PathFormula) -> Self {
        Self::not(Self::and(a, Self::not(b)))
    }

    pub fn until(left: PathFormula, right: PathFormula, lo: f64, hi: f64) -> Self {
        PathFormula::Until { left: Box::new(left), right: Box::new(right), lo, hi }
    }

    pub fn eventually(f: PathFormula, lo: f64, hi: f64) -> Self {
        Self::until(PathFormula::True, f, lo, hi)
    }

    pub fn globally(f: PathFormula, lo: f64, hi: f64) -> Self {
        Self::not(Self::eventually(Self::not(f), lo, hi))
    }

    /// Nesting depth; atoms count as 1.
    pub fn depth(&self) -> usize {
        match self {
            PathFormula::True | PathFormula::Atom { .. } | PathFormula::Embed { .. } => 1,
            PathFormula::Not(f) => 1 + f.depth(),
            PathFormula::And(a, b) | PathFormula::Until { left: a, right: b, .. } => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn contains_embed(&self) -> bool {
        match self {
            PathFormula::True | PathFormula::Atom { .. } => false,
            PathFormula::Embed { .. } => true,
            PathFormula::Not(f) => f.contains_embed(),
            PathFormula::And(a, b) | PathFormula::Until { left: a, right: b, .. } => {
                a.contains_embed() || b.contains_embed()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Abs,
    Min,
    Max,
}

impl ArithOp {
    pub fn arity(self) -> usize {
        if self == ArithOp::Abs {
            1
        } else {
            2
        }
    }
}

/// What a probability operator quantifies over.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbBody {
    Path(PathFormula),
    /// A comparison with the operator's variables free (nested operators).
    State(StateFormula),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbExpr {
    /// `P{vars}(body)`.
    Prob { vars: Vec<String>, body: Box<ProbBody> },
    Const(f64),
    Arith { op: ArithOp, args: Vec<ProbExpr> },
}

impl ProbExpr {
    pub fn prob(vars: &[&str], body: PathFormula) -> Self {
        ProbExpr::Prob {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            body: Box::new(ProbBody::Path(body)),
        }
    }

    pub fn arith(op: ArithOp, args: Vec<ProbExpr>) -> Self {
        ProbExpr::Arith { op, args }
    }

    /// Probability operators appearing directly in this expression (not
    /// inside operator bodies), left to right.
    pub fn probs(&self) -> Vec<&ProbExpr> {
        let mut out = Vec::new();
        self.collect_probs(&mut out);
        out
    }

    fn collect_probs<'a>(&'a self, out: &mut Vec<&'a ProbExpr>) {
        match self {
            ProbExpr::Prob { .. } => out.push(self),
            ProbExpr::Const(_) => {}
            ProbExpr::Arith { args, .. } => args.iter().for_each(|a| a.collect_probs(out)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
}

impl CmpOp {
    /// Operator with sides swapped: `a < b` iff `b > a`.
    pub fn flip(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFormula {
    Compare { left: ProbExpr, op: CmpOp, right: ProbExpr },
    /// `(e1, ..., en) in region`; the region is looked up by name.
    InRegion { exprs: Vec<ProbExpr>, region: String },
}

impl StateFormula {
    pub fn compare(left: ProbExpr, op: CmpOp, right: ProbExpr) -> Self {
        StateFormula::Compare { left, op, right }
    }

    /// Top-level probability operators, left to right.
    pub fn probs(&self) -> Vec<&ProbExpr> {
        match self {
            StateFormula::Compare { left, right, .. } => {
                let mut v = left.probs();
                v.extend(right.probs());
                v
            }
            StateFormula::InRegion { exprs, .. } => exprs.iter().flat_map(|e| e.probs()).collect(),
        }
    }
}

/// Result of parsing a formula file or string.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    State(StateFormula),
    Path(PathFormula),
}
