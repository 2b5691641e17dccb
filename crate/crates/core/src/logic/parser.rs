//! Recursive-descent parser with backtracking for the few places where a
//! parenthesis could open either a path formula or a state formula.

use std::collections::BTreeSet;

use super::analysis::{free_vars_path, free_vars_state};
use super::ast::*;
use super::LogicError;

const KEYWORDS: &[&str] = &[
    "P", "U", "F", "G", "in", "inf", "abs", "min", "max", "true", "false",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "->", "<=", ">=", "(", ")", "{", "}", "[", "]", ",", "@", "!", "&", "|", "+", "-", "*", "/",
    "<", ">", "=",
];

fn lex(src: &str) -> Result<Vec<Token>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<f64>().map_err(|_| LogicError::Syntax {
                line: start_line,
                col: start_col,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token { tok: Tok::Number(value), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line: start_line, col: start_col });
            }
            None => {
                return Err(LogicError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    furthest: Option<(usize, String)>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Self { tokens, pos: 0, furthest: None }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number {v}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        let msg = format!("expected {expected}, found {found}");
        if self.furthest.as_ref().is_none_or(|(p, _)| self.pos >= *p) {
            self.furthest = Some((self.pos, msg));
        }
        Err(())
    }

    fn error(&self) -> LogicError {
        let (pos, message) = self
            .furthest
            .clone()
            .unwrap_or((self.pos, "syntax error".to_string()));
        let t = &self.tokens[pos.min(self.tokens.len() - 1)];
        LogicError::Syntax { line: t.line, col: t.col, message }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Number(v) => {
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("a number"),
        }
    }

    // state := cmp | "(" probexpr {"," probexpr} ")" "in" IDENT
    fn state(&mut self) -> PResult<StateFormula> {
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(f) = self.region_membership() {
                return Ok(f);
            }
            self.pos = save;
        }
        let left = self.expr()?;
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("=") => CmpOp::Eq,
            _ => return self.fail("a comparison operator"),
        };
        self.pos += 1;
        let right = self.expr()?;
        Ok(StateFormula::Compare { left, op, right })
    }

    fn region_membership(&mut self) -> PResult<StateFormula> {
        self.expect_sym("(")?;
        let mut exprs = vec![self.expr()?];
        while self.eat_sym(",") {
            exprs.push(self.expr()?);
        }
        self.expect_sym(")")?;
        if !self.eat_kw("in") {
            return self.fail("`in`");
        }
        let region = self.ident("a region name")?;
        Ok(StateFormula::InRegion { exprs, region })
    }

    fn expr(&mut self) -> PResult<ProbExpr> {
        let mut left = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(left);
            };
            let right = self.term()?;
            left = binary(op, left, right);
        }
    }

    fn term(&mut self) -> PResult<ProbExpr> {
        let mut left = self.factor()?;
        loop {
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else {
                return Ok(left);
            };
            let right = self.factor()?;
            left = binary(op, left, right);
        }
    }

    fn factor(&mut self) -> PResult<ProbExpr> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.pos += 1;
                Ok(ProbExpr::Const(v))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Number(_)) => {
                self.pos += 1;
                Ok(ProbExpr::Const(-self.number()?))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "abs" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(ProbExpr::arith(ArithOp::Abs, vec![e]))
            }
            Tok::Ident(k) if k == "min" || k == "max" => {
                self.pos += 1;
                let op = if k == "min" { ArithOp::Min } else { ArithOp::Max };
                self.expect_sym("(")?;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(")")?;
                Ok(ProbExpr::arith(op, vec![a, b]))
            }
            Tok::Ident(k) if k == "P" => {
                self.pos += 1;
                self.prob()
            }
            _ => self.fail("a probability expression"),
        }
    }

    fn prob(&mut self) -> PResult<ProbExpr> {
        self.expect_sym("{")?;
        let mut vars = vec![self.ident("a path variable")?];
        while self.eat_sym(",") {
            let v = self.ident("a path variable")?;
            if vars.contains(&v) {
                self.pos -= 1;
                return self.fail(&format!("distinct path variables (`{v}` repeats)"));
            }
            vars.push(v);
        }
        self.expect_sym("}")?;
        self.expect_sym("(")?;
        let save = self.pos;
        if let Ok(st) = self.state() {
            if self.eat_sym(")") {
                return Ok(ProbExpr::Prob { vars, body: Box::new(ProbBody::State(st)) });
            }
        }
        self.pos = save;
        let path = self.path()?;
        self.expect_sym(")")?;
        Ok(ProbExpr::Prob { vars, body: Box::new(ProbBody::Path(path)) })
    }

    // path := imp ["U" intv path]
    fn path(&mut self) -> PResult<PathFormula> {
        let left = self.implication()?;
        if self.eat_kw("U") {
            let (lo, hi) = self.interval()?;
            let right = self.path()?;
            return Ok(PathFormula::until(left, right, lo, hi));
        }
        Ok(left)
    }

    fn implication(&mut self) -> PResult<PathFormula> {
        let left = self.disjunction()?;
        if self.eat_sym("->") {
            let right = self.implication()?;
            return Ok(PathFormula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> PResult<PathFormula> {
        let mut left = self.conjunction()?;
        while self.eat_sym("|") {
            let right = self.conjunction()?;
            left = PathFormula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> PResult<PathFormula> {
        let mut left = self.unary()?;
        while self.eat_sym("&") {
            let right = self.unary()?;
            left = PathFormula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<PathFormula> {
        if self.eat_sym("!") {
            return Ok(PathFormula::not(self.unary()?));
        }
        if self.eat_kw("F") {
            let (lo, hi) = self.interval()?;
            return Ok(PathFormula::eventually(self.unary()?, lo, hi));
        }
        if self.eat_kw("G") {
            let (lo, hi) = self.interval()?;
            return Ok(PathFormula::globally(self.unary()?, lo, hi));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<PathFormula> {
        if self.eat_kw("true") {
            return Ok(PathFormula::True);
        }
        if self.eat_kw("false") {
            return Ok(PathFormula::not(PathFormula::True));
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.pos += 1;
            if let Ok(st) = self.state() {
                if self.eat_sym(")") && self.eat_sym("@") {
                    if let Ok(var) = self.ident("a path variable") {
                        return Ok(PathFormula::Embed { state: Box::new(st), var });
                    }
                }
            }
            self.pos = save + 1;
            let inner = self.path()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        let label = self.ident("an atomic proposition")?;
        self.expect_sym("@")?;
        let var = self.ident("a path variable")?;
        Ok(PathFormula::Atom { label, var })
    }

    fn interval(&mut self) -> PResult<(f64, f64)> {
        self.expect_sym("[")?;
        let lo = self.number()?;
        self.expect_sym(",")?;
        let hi = if self.eat_kw("inf") { f64::INFINITY } else { self.number()? };
        self.expect_sym("]")?;
        Ok((lo, hi))
    }

    fn finish(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }
}

/// Parse a closed state formula.
pub fn parse_state_formula(src: &str) -> Result<StateFormula, LogicError> {
    let mut p = Parser::new(lex(src)?);
    let f = p.state().and_then(|f| p.finish().map(|_| f)).map_err(|_| p.error())?;
    validate_state(&f)?;
    if let Some(v) = free_vars_state(&f).into_iter().next() {
        return Err(LogicError::UnboundPathVariable(v));
    }
    Ok(f)
}

/// Parse a formula: a closed state formula if the text is one, otherwise a
/// path formula (free path variables allowed).
pub fn parse_formula(src: &str) -> Result<Formula, LogicError> {
    let tokens = lex(src)?;
    let mut p = Parser::new(tokens.clone());
    if let Ok(f) = p.state().and_then(|f| p.finish().map(|_| f)) {
        validate_state(&f)?;
        if let Some(v) = free_vars_state(&f).into_iter().next() {
            return Err(LogicError::UnboundPathVariable(v));
        }
        return Ok(Formula::State(f));
    }
    let state_err = p.furthest.clone();
    let mut q = Parser::new(tokens);
    match q.path().and_then(|f| q.finish().map(|_| f)) {
        Ok(f) => {
            validate_path(&f)?;
            Ok(Formula::Path(f))
        }
        Err(()) => {
            // report whichever attempt got further
            if let (Some(s), Some(t)) = (&state_err, &q.furthest) {
                if s.0 > t.0 {
                    q.furthest = state_err;
                }
            }
            Err(q.error())
        }
    }
}

fn validate_state(f: &StateFormula) -> Result<(), LogicError> {
    match f {
        StateFormula::Compare { left, right, .. } => {
            validate_expr(left)?;
            validate_expr(right)
        }
        StateFormula::InRegion { exprs, .. } => exprs.iter().try_for_each(validate_expr),
    }
}

fn validate_expr(e: &ProbExpr) -> Result<(), LogicError> {
    match e {
        ProbExpr::Const(_) => Ok(()),
        ProbExpr::Arith { args, .. } => args.iter().try_for_each(validate_expr),
        ProbExpr::Prob { vars, body } => {
            let fv = match body.as_ref() {
                ProbBody::Path(p) => {
                    validate_path(p)?;
                    free_vars_path(p)
                }
                ProbBody::State(s) => {
                    validate_state(s)?;
                    free_vars_state(s)
                }
            };
            let bound: BTreeSet<String> = vars.iter().cloned().collect();
            if !bound.is_subset(&fv) {
                return Err(LogicError::VacuousQuantifier(
                    bound.difference(&fv).cloned().collect(),
                ));
            }
            Ok(())
        }
    }
}

fn validate_path(f: &PathFormula) -> Result<(), LogicError> {
    match f {
        PathFormula::True | PathFormula::Atom { .. } => Ok(()),
        PathFormula::Embed { state, .. } => {
            validate_state(state)?;
            match free_vars_state(state).into_iter().next() {
                Some(v) => Err(LogicError::UnboundPathVariable(v)),
                None => Ok(()),
            }
        }
        PathFormula::Not(g) => validate_path(g),
        PathFormula::And(a, b) => {
            validate_path(a)?;
            validate_path(b)
        }
        PathFormula::Until { left, right, lo, hi } => {
            if !(*lo >= 0.0 && lo < hi) {
                return Err(LogicError::InvalidInterval { lo: *lo, hi: *hi });
            }
            validate_path(left)?;
            validate_path(right)
        }
    }
}

/// Binary arithmetic node; two constants are folded so thresholds such as
/// `1-0.05` stay constants.
fn binary(op: ArithOp, a: ProbExpr, b: ProbExpr) -> ProbExpr {
    match (&a, &b, op) {
        (ProbExpr::Const(x), ProbExpr::Const(y), ArithOp::Add) => ProbExpr::Const(x + y),
        (ProbExpr::Const(x), ProbExpr::Const(y), ArithOp::Sub) => ProbExpr::Const(x - y),
        (ProbExpr::Const(x), ProbExpr::Const(y), ArithOp::Mul) => ProbExpr::Const(x * y),
        (ProbExpr::Const(x), ProbExpr::Const(y), ArithOp::Div) if *y != 0.0 => ProbExpr::Const(x / y),
        _ => ProbExpr::arith(op, vec![a, b]),
    }
}
