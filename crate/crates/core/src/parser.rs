//! Query documents.
//!
//! ```text
//! # comment
//! vars X1, X2, X3, X4
//! prove H(X1) - H(X4) >= 0
//! given I(X1;X4) = 0
//! given H(X4|X1,X2) = 0
//! ```
//!
//! `prove` introduces the single objective, `given` a constraint. Statements
//! are `expr REL expr` with `REL` one of `>=`, `<=`, `=` and are normalized
//! to `lhs - rhs >= 0` or `lhs - rhs = 0`. Expressions are sums of optionally
//! scaled measures `H(A)`, `H(A|C)`, `I(A;B)`, `I(A;B|C)` where each of `A`,
//! `B`, `C` is a comma-separated list of variable names. Coefficients are
//! integers or fractions `p/q`, written before the measure with an optional
//! `*`. Without a `vars` line, variables are numbered in order of first use.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::{LinPoly, Rational};
use crate::atoms::{self, MeasureTerm, SVarSequence, VarSet, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unexpected {0:?}")]
    Unexpected(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("more than one `vars` declaration")]
    DuplicateDeclaration,
    #[error("`vars` must come before any statement")]
    LateDeclaration,
    #[error("more than one `prove` statement")]
    DuplicateObjective,
    #[error("document has no `prove` statement")]
    MissingObjective,
    #[error("only two-argument mutual information I(A;B|C) is supported")]
    MultiwayInformation,
    #[error("constant terms are not allowed in information expressions")]
    ConstantTerm,
    #[error("division by zero in coefficient")]
    ZeroDenominator,
    #[error("too many random variables (at most {MAX_VARS})")]
    TooManyVariables,
    #[error("unknown keyword `{0}` (expected `vars`, `prove` or `given`)")]
    UnknownKeyword(String),
}

/// Linear combination of information measures. Terms are canonical: no zero
/// coefficients and no repeated measure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    terms: Vec<(Rational, MeasureTerm)>,
}

impl Expr {
    pub fn from_terms<I: IntoIterator<Item = (Rational, MeasureTerm)>>(it: I) -> Self {
        let mut e = Expr::default();
        for (c, m) in it {
            e.add_term(c, m);
        }
        e
    }

    pub fn terms(&self) -> &[(Rational, MeasureTerm)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, c: Rational, m: MeasureTerm) {
        if let Some(pos) = self.terms.iter().position(|(_, t)| *t == m) {
            self.terms[pos].0 += c;
            if self.terms[pos].0.is_zero() {
                self.terms.remove(pos);
            }
        } else if !c.is_zero() {
            self.terms.push((c, m));
        }
    }

    pub fn add_scaled(&mut self, factor: &Rational, other: &Expr) {
        for (c, m) in &other.terms {
            self.add_term(factor * c, *m);
        }
    }

    pub fn negated(&self) -> Expr {
        let mut e = Expr::default();
        e.add_scaled(&-Rational::one(), self);
        e
    }

    /// Variables mentioned anywhere in the expression.
    pub fn support(&self) -> VarSet {
        self.terms
            .iter()
            .fold(VarSet::EMPTY, |s, (_, m)| s.union(m.support()))
    }

    /// Over s-variable coordinates.
    pub fn lower(&self, seq: &SVarSequence) -> LinPoly {
        atoms::expand_expr(&self.terms, seq)
    }

    /// Over joint-entropy coordinates.
    pub fn lower_joint_entropy(&self) -> LinPoly {
        atoms::joint_entropy_vector(&self.terms)
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        ExprDisplay { e: self, names }
    }
}

struct ExprDisplay<'a> {
    e: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, m)) in self.e.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{}", m.display_with(self.names))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `expr >= 0`
    Geq,
    /// `expr = 0`
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub relation: Relation,
    pub expr: Expr,
    /// 1-based source line.
    pub line: usize,
}

/// Parsed document; the objective may be absent (for `simplify`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub variables: Vec<String>,
    pub objective: Option<Statement>,
    pub constraints: Vec<Statement>,
}

impl Document {
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn into_query(self) -> Result<Query, ParseError> {
        let objective = self.objective.ok_or(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::MissingObjective,
        })?;
        Ok(Query {
            variables: self.variables,
            objective,
            constraints: self.constraints,
        })
    }

    pub fn equalities(&self) -> impl Iterator<Item = &Statement> {
        self.constraints
            .iter()
            .filter(|s| s.relation == Relation::Eq)
    }

    pub fn inequalities(&self) -> impl Iterator<Item = &Statement> {
        self.constraints
            .iter()
            .filter(|s| s.relation == Relation::Geq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub variables: Vec<String>,
    pub objective: Statement,
    pub constraints: Vec<Statement>,
}

impl Query {
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn is_identity(&self) -> bool {
        self.objective.relation == Relation::Eq
    }

    pub fn equalities(&self) -> impl Iterator<Item = &Statement> {
        self.constraints
            .iter()
            .filter(|s| s.relation == Relation::Eq)
    }

    pub fn inequalities(&self) -> impl Iterator<Item = &Statement> {
        self.constraints
            .iter()
            .filter(|s| s.relation == Relation::Geq)
    }
}

/// A query lowered to polynomials. Elemental inequalities are not included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lowered {
    pub objective: LinPoly,
    pub identity: bool,
    pub equalities: Vec<LinPoly>,
    pub inequalities: Vec<LinPoly>,
}

/// Lowers over s-variable coordinates.
pub fn lower(q: &Query, seq: &SVarSequence) -> Lowered {
    lower_with(q, |e| e.lower(seq))
}

/// Lowers over joint-entropy coordinates.
pub fn lower_joint_entropy(q: &Query) -> Lowered {
    lower_with(q, Expr::lower_joint_entropy)
}

fn lower_with<F: Fn(&Expr) -> LinPoly>(q: &Query, f: F) -> Lowered {
    Lowered {
        objective: f(&q.objective.expr),
        identity: q.is_identity(),
        equalities: q.equalities().map(|s| f(&s.expr)).collect(),
        inequalities: q.inequalities().map(|s| f(&s.expr)).collect(),
    }
}

/// Name table: either fixed by a declaration or grown on first use.
#[derive(Clone, Debug, Default)]
pub struct VarTable {
    names: Vec<String>,
    fixed: bool,
}

impl VarTable {
    pub fn declared(names: Vec<String>) -> Self {
        Self { names, fixed: true }
    }

    pub fn inferred() -> Self {
        Self::default()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn lookup(&mut self, name: &str) -> Result<usize, ParseErrorKind> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Ok(i + 1);
        }
        if self.fixed {
            return Err(ParseErrorKind::UnknownVariable(name.to_string()));
        }
        if self.names.len() >= MAX_VARS {
            return Err(ParseErrorKind::TooManyVariables);
        }
        self.names.push(name.to_string());
        Ok(self.names.len())
    }
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.pos + 1,
            kind,
        }
    }

    fn err_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: pos + 1,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected_or(what))
        }
    }

    fn unexpected_or(&mut self, what: &'static str) -> ParseError {
        match self.peek() {
            None => self.err(ParseErrorKind::Expected(what)),
            Some(_) => self.err(ParseErrorKind::Expected(what)),
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.get(self.pos) {
            Some(c) if c.is_alphabetic() || *c == '_' => {}
            _ => return None,
        }
        while let Some(c) = self.chars.get(self.pos) {
            if c.is_alphanumeric() || *c == '_' || *c == '\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    /// `INT` or `INT/INT`
    fn coefficient(&mut self) -> Result<Option<Rational>, ParseError> {
        let start = self.pos;
        let Some(num) = self.integer() else {
            return Ok(None);
        };
        if self.peek() == Some('/') {
            self.pos += 1;
            let den = self
                .integer()
                .ok_or_else(|| self.err(ParseErrorKind::Expected("denominator")))?;
            if den.is_zero() {
                return Err(self.err_at(start, ParseErrorKind::ZeroDenominator));
            }
            return Ok(Some(Rational::new(num, den)));
        }
        Ok(Some(Rational::from_integer(num)))
    }

    fn var_list(&mut self, vars: &mut VarTable) -> Result<VarSet, ParseError> {
        let mut set = VarSet::EMPTY;
        loop {
            self.skip_ws();
            let at = self.pos;
            let name = self
                .ident()
                .ok_or_else(|| self.err(ParseErrorKind::Expected("variable name")))?;
            let i = vars.lookup(&name).map_err(|k| self.err_at(at, k))?;
            set = set.with(i);
            if !self.eat(',') {
                return Ok(set);
            }
        }
    }

    /// Parses a measure after its head letter; `None` when it vanishes.
    fn measure(
        &mut self,
        head: char,
        vars: &mut VarTable,
    ) -> Result<Option<MeasureTerm>, ParseError> {
        self.expect('(', "`(`")?;
        let first = self.var_list(vars)?;
        let term = if head == 'H' {
            let cond = if self.eat('|') {
                self.var_list(vars)?
            } else {
                VarSet::EMPTY
            };
            MeasureTerm::entropy(first, cond)
        } else {
            self.expect(';', "`;`")?;
            let second = self.var_list(vars)?;
            if self.peek() == Some(';') {
                return Err(self.err(ParseErrorKind::MultiwayInformation));
            }
            let cond = if self.eat('|') {
                self.var_list(vars)?
            } else {
                VarSet::EMPTY
            };
            MeasureTerm::mutual_information(first, second, cond)
        };
        self.expect(')', "`)`")?;
        Ok(term)
    }

    fn is_measure_head(&mut self) -> Option<char> {
        let c = self.peek()?;
        if c != 'H' && c != 'I' {
            return None;
        }
        let mut k = 1;
        while matches!(self.peek_at(k), Some(w) if w.is_whitespace()) {
            k += 1;
        }
        (self.peek_at(k) == Some('(')).then_some(c)
    }

    fn term(&mut self, vars: &mut VarTable) -> Result<(Rational, Option<MeasureTerm>), ParseError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let coef = self.coefficient()?;
        if coef.is_some() {
            self.eat('*');
        }
        match self.is_measure_head() {
            Some(head) => {
                self.pos += 1;
                let m = self.measure(head, vars)?;
                Ok((coef.unwrap_or_else(Rational::one), m))
            }
            None => match coef {
                Some(c) if c.is_zero() => Ok((c, None)),
                Some(_) => Err(self.err_at(start, ParseErrorKind::ConstantTerm)),
                None => match self.peek() {
                    None => Err(self.err(ParseErrorKind::Expected("term"))),
                    Some(_) => {
                        let at = self.pos;
                        let tok = self
                            .ident()
                            .unwrap_or_else(|| self.chars[self.pos].to_string());
                        Err(self.err_at(at, ParseErrorKind::Unexpected(tok)))
                    }
                },
            },
        }
    }

    fn expr(&mut self, vars: &mut VarTable) -> Result<Expr, ParseError> {
        let mut e = Expr::default();
        let mut sign = Rational::one();
        if self.eat('-') {
            sign = -sign;
        } else {
            self.eat('+');
        }
        loop {
            let (c, m) = self.term(vars)?;
            if let Some(m) = m {
                e.add_term(&sign * c, m);
            }
            if self.eat('+') {
                sign = Rational::one();
            } else if self.peek() == Some('-') {
                self.pos += 1;
                sign = -Rational::one();
            } else {
                return Ok(e);
            }
        }
    }

    fn relation(&mut self) -> Option<(Relation, bool)> {
        let c0 = self.peek()?;
        let c1 = self.peek_at(1);
        let (rel, flip, len) = match (c0, c1) {
            ('>', Some('=')) => (Relation::Geq, false, 2),
            ('<', Some('=')) => (Relation::Geq, true, 2),
            ('=', Some('=')) => (Relation::Eq, false, 2),
            ('=', _) => (Relation::Eq, false, 1),
            ('≥', _) => (Relation::Geq, false, 1),
            ('≤', _) => (Relation::Geq, true, 1),
            _ => return None,
        };
        self.pos += len;
        Some((rel, flip))
    }

    fn statement(&mut self, vars: &mut VarTable) -> Result<Statement, ParseError> {
        let lhs = self.expr(vars)?;
        let (relation, flip) = self
            .relation()
            .ok_or_else(|| self.err(ParseErrorKind::Expected("`>=`, `<=` or `=`")))?;
        let rhs = self.expr(vars)?;
        if !self.at_end() {
            let at = self.pos;
            let tok: String = self.chars[self.pos..].iter().collect();
            return Err(self.err_at(at, ParseErrorKind::Unexpected(tok)));
        }
        let mut expr = lhs;
        expr.add_scaled(&-Rational::one(), &rhs);
        if flip {
            expr = expr.negated();
        }
        Ok(Statement {
            relation,
            expr,
            line: self.line,
        })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses one expression against a fixed list of variable names.
pub fn parse_expression(text: &str, names: &[String]) -> Result<Expr, ParseError> {
    let mut vars = VarTable::declared(names.to_vec());
    parse_expression_in(text, &mut vars)
}

/// Parses one expression, resolving (or adding) names in `vars`.
pub fn parse_expression_in(text: &str, vars: &mut VarTable) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(text, 1);
    let e = cur.expr(vars)?;
    if !cur.at_end() {
        let at = cur.pos;
        let tok: String = cur.chars[cur.pos..].iter().collect();
        return Err(cur.err_at(at, ParseErrorKind::Unexpected(tok)));
    }
    Ok(e)
}

/// Parses a document; the objective is optional.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut vars = VarTable::inferred();
    let mut declared = false;
    let mut seen_statement = false;
    let mut objective: Option<Statement> = None;
    let mut constraints = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = strip_comment(raw);
        let mut cur = Cursor::new(body, line_no);
        if cur.at_end() {
            continue;
        }
        let kw_at = cur.pos;
        let kw = cur
            .ident()
            .ok_or_else(|| cur.err(ParseErrorKind::Expected("`vars`, `prove` or `given`")))?;
        match kw.as_str() {
            "vars" => {
                if declared {
                    return Err(cur.err_at(kw_at, ParseErrorKind::DuplicateDeclaration));
                }
                if seen_statement {
                    return Err(cur.err_at(kw_at, ParseErrorKind::LateDeclaration));
                }
                let mut names: Vec<String> = Vec::new();
                loop {
                    cur.skip_ws();
                    let at = cur.pos;
                    let name = cur
                        .ident()
                        .ok_or_else(|| cur.err(ParseErrorKind::Expected("variable name")))?;
                    if names.contains(&name) {
                        return Err(cur.err_at(at, ParseErrorKind::DuplicateVariable(name)));
                    }
                    if names.len() >= MAX_VARS {
                        return Err(cur.err_at(at, ParseErrorKind::TooManyVariables));
                    }
                    names.push(name);
                    if !cur.eat(',') {
                        break;
                    }
                }
                if !cur.at_end() {
                    let at = cur.pos;
                    let tok: String = cur.chars[cur.pos..].iter().collect();
                    return Err(cur.err_at(at, ParseErrorKind::Unexpected(tok)));
                }
                vars = VarTable::declared(names);
                declared = true;
            }
            "prove" => {
                seen_statement = true;
                if objective.is_some() {
                    return Err(cur.err_at(kw_at, ParseErrorKind::DuplicateObjective));
                }
                objective = Some(cur.statement(&mut vars)?);
            }
            "given" => {
                seen_statement = true;
                constraints.push(cur.statement(&mut vars)?);
            }
            other => {
                return Err(cur.err_at(kw_at, ParseErrorKind::UnknownKeyword(other.to_string())));
            }
        }
    }
    Ok(Document {
        variables: vars.names().to_vec(),
        objective,
        constraints,
    })
}

/// Parses a document that must contain an objective.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    parse_document(text)?.into_query()
}
