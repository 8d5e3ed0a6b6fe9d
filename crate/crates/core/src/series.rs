//! Truncated series in the embedding parameter and decomposition polynomials.
//!
//! The embedding parameter never appears as a polynomial variable; it is the
//! index into [`TruncatedSeries::coeffs`]. Composing a [`NonlinearExpr`] with
//! the generating series `sum_k terms[k] s^k` and reading off coefficient `k`
//! yields the decomposition polynomial of order `k` (`A_k` for classical terms,
//! `B_k` for terms carrying the convergence-control parameter).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ratpoly::{lex, Polynomial, Rational, Token, Var};

/// Highest derivative order accepted in either variable unless configured otherwise.
pub const DEFAULT_MAX_DERIVATIVE_ORDER: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<Polynomial>,
}

impl TruncatedSeries {
    /// Panics when `coeffs` is empty; a series always has order >= 0.
    pub fn new(coeffs: Vec<Polynomial>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        TruncatedSeries { coeffs }
    }

    pub fn constant(p: Polynomial, order: usize) -> Self {
        let mut coeffs = vec![Polynomial::zero(); order + 1];
        coeffs[0] = p;
        TruncatedSeries { coeffs }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Polynomial::one(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Polynomial::zero());
        TruncatedSeries { coeffs }
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(other.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

/// Cauchy product truncated at the common order.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
    let order = a.order().min(b.order());
    let coeffs = (0..=order).map(|k| cauchy_coeff(&a.coeffs, &b.coeffs, k)).collect();
    TruncatedSeries { coeffs }
}

fn cauchy_coeff(a: &[Polynomial], b: &[Polynomial], k: usize) -> Polynomial {
    let mut acc = Polynomial::zero();
    for i in 0..=k {
        if a[i].is_zero() || b[k - i].is_zero() {
            continue;
        }
        acc = acc + &a[i] * &b[k - i];
    }
    acc
}

/// Multiplicative inverse by the long-division recurrence
/// `inv_k = -(1/a_0) sum_{j=1..k} a_j inv_{k-j}`.
pub fn series_inverse(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    let lead = leading_constant(&a.coeffs[0])?;
    let inv_lead = Rational::one() / lead;
    let mut inv: Vec<Polynomial> = vec![Polynomial::constant(inv_lead.clone())];
    for k in 1..=a.order() {
        let mut acc = Polynomial::zero();
        for j in 1..=k {
            if a.coeffs[j].is_zero() || inv[k - j].is_zero() {
                continue;
            }
            acc = acc + &a.coeffs[j] * &inv[k - j];
        }
        inv.push(acc.scale(&-&inv_lead));
    }
    Ok(TruncatedSeries { coeffs: inv })
}

fn leading_constant(p: &Polynomial) -> Result<Rational> {
    match p.as_constant() {
        Some(c) if !c.is_zero() => Ok(c),
        _ => Err(Error::NonInvertibleLeadingTerm),
    }
}

/// Integer power with the same order as the input. Negative powers need a
/// nonzero constant leading coefficient.
pub fn series_int_pow(a: &TruncatedSeries, n: i32) -> Result<TruncatedSeries> {
    let base = if n < 0 { series_inverse(a)? } else { a.clone() };
    let mut e = n.unsigned_abs();
    let mut result = TruncatedSeries::one(a.order());
    let mut square = base;
    while e > 0 {
        if e & 1 == 1 {
            result = series_mul(&result, &square);
        }
        e >>= 1;
        if e > 0 {
            square = series_mul(&square, &square);
        }
    }
    Ok(result)
}

/// Expression over the unknown `u` and its partial derivatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonlinearExpr {
    /// `dx^x dt^t u`; `(0, 0)` is `u` itself.
    UnknownDeriv { x: u32, t: u32 },
    Const(Polynomial),
    Add(Vec<NonlinearExpr>),
    Mul(Vec<NonlinearExpr>),
    IntPow(Box<NonlinearExpr>, i32),
}

impl NonlinearExpr {
    pub fn u() -> Self {
        NonlinearExpr::UnknownDeriv { x: 0, t: 0 }
    }

    pub fn deriv(x: u32, t: u32) -> Self {
        NonlinearExpr::UnknownDeriv { x, t }
    }

    pub fn constant(p: impl Into<Polynomial>) -> Self {
        NonlinearExpr::Const(p.into())
    }

    /// Panics on `n == 0`.
    pub fn pow(self, n: i32) -> Self {
        assert!(n != 0, "zero exponent");
        NonlinearExpr::IntPow(Box::new(self), n)
    }

    pub fn times(self, other: NonlinearExpr) -> Self {
        match self {
            NonlinearExpr::Mul(mut v) => {
                v.push(other);
                NonlinearExpr::Mul(v)
            }
            e => NonlinearExpr::Mul(vec![e, other]),
        }
    }

    pub fn plus(self, other: NonlinearExpr) -> Self {
        match self {
            NonlinearExpr::Add(mut v) => {
                v.push(other);
                NonlinearExpr::Add(v)
            }
            e => NonlinearExpr::Add(vec![e, other]),
        }
    }

    /// Checks derivative orders and exponents.
    pub fn validate(&self, max_order: u32) -> Result<()> {
        match self {
            NonlinearExpr::UnknownDeriv { x, t } => {
                if *x > max_order || *t > max_order {
                    return Err(Error::DerivativeOrderExceeded { x: *x, t: *t, max: max_order });
                }
                Ok(())
            }
            NonlinearExpr::Const(_) => Ok(()),
            NonlinearExpr::Add(v) | NonlinearExpr::Mul(v) => {
                v.iter().try_for_each(|e| e.validate(max_order))
            }
            NonlinearExpr::IntPow(b, n) => {
                if *n == 0 {
                    return Err(Error::InvalidProblem("zero exponent in nonlinearity".into()));
                }
                b.validate(max_order)
            }
        }
    }

    /// Whether any constant mentions `v`.
    pub fn contains(&self, v: Var) -> bool {
        match self {
            NonlinearExpr::UnknownDeriv { .. } => false,
            NonlinearExpr::Const(p) => p.contains(v),
            NonlinearExpr::Add(e) | NonlinearExpr::Mul(e) => e.iter().any(|e| e.contains(v)),
            NonlinearExpr::IntPow(b, _) => b.contains(v),
        }
    }

    /// Substitutes a value for `v` inside every constant.
    pub fn substitute_value(&self, v: Var, value: &Rational) -> NonlinearExpr {
        match self {
            NonlinearExpr::UnknownDeriv { .. } => self.clone(),
            NonlinearExpr::Const(p) => NonlinearExpr::Const(p.substitute_value(v, value)),
            NonlinearExpr::Add(e) => NonlinearExpr::Add(e.iter().map(|e| e.substitute_value(v, value)).collect()),
            NonlinearExpr::Mul(e) => NonlinearExpr::Mul(e.iter().map(|e| e.substitute_value(v, value)).collect()),
            NonlinearExpr::IntPow(b, n) => NonlinearExpr::IntPow(Box::new(b.substitute_value(v, value)), *n),
        }
    }

    /// All `(x, t)` derivative orders referenced, sorted and deduplicated.
    pub fn derivative_orders(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        self.collect_orders(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_orders(&self, out: &mut Vec<(u32, u32)>) {
        match self {
            NonlinearExpr::UnknownDeriv { x, t } => out.push((*x, *t)),
            NonlinearExpr::Const(_) => {}
            NonlinearExpr::Add(v) | NonlinearExpr::Mul(v) => {
                v.iter().for_each(|e| e.collect_orders(out))
            }
            NonlinearExpr::IntPow(b, _) => b.collect_orders(out),
        }
    }

    /// `N[psi]` as an exact polynomial; fails for negative powers of a
    /// non-constant argument.
    pub fn apply(&self, psi: &Polynomial) -> Result<Polynomial> {
        Ok(compose(self, std::slice::from_ref(psi), 0)?.coeffs.swap_remove(0))
    }

    /// Numeric evaluation given the values of the derivative images and constants.
    /// Reciprocal powers of a base with magnitude below `floor` fail.
    pub fn eval_numeric(
        &self,
        deriv: &impl Fn(u32, u32) -> f64,
        constant: &impl Fn(&Polynomial) -> f64,
        floor: f64,
    ) -> Result<f64> {
        Ok(match self {
            NonlinearExpr::UnknownDeriv { x, t } => deriv(*x, *t),
            NonlinearExpr::Const(p) => constant(p),
            NonlinearExpr::Add(v) => {
                let mut s = 0.0;
                for e in v {
                    s += e.eval_numeric(deriv, constant, floor)?;
                }
                s
            }
            NonlinearExpr::Mul(v) => {
                let mut s = 1.0;
                for e in v {
                    s *= e.eval_numeric(deriv, constant, floor)?;
                }
                s
            }
            NonlinearExpr::IntPow(b, n) => {
                let base = b.eval_numeric(deriv, constant, floor)?;
                if *n < 0 && base.abs() < floor {
                    return Err(Error::DivisionNearZero { value: base, floor });
                }
                base.powi(*n)
            }
        })
    }
}

/// Truncated series of `N(sum_k terms[k] s^k)` to order `order`. Missing terms
/// count as zero; terms beyond `order` are ignored.
pub fn compose(n: &NonlinearExpr, terms: &[Polynomial], order: usize) -> Result<TruncatedSeries> {
    compose_with_max(n, terms, order, DEFAULT_MAX_DERIVATIVE_ORDER)
}

pub fn compose_with_max(
    n: &NonlinearExpr,
    terms: &[Polynomial],
    order: usize,
    max_order: u32,
) -> Result<TruncatedSeries> {
    assert!(!terms.is_empty(), "compose needs at least one term");
    n.validate(max_order)?;
    let mut padded = terms.to_vec();
    padded.resize(order + 1, Polynomial::zero());
    compose_rec(n, &padded)
}

fn compose_rec(n: &NonlinearExpr, terms: &[Polynomial]) -> Result<TruncatedSeries> {
    let order = terms.len() - 1;
    Ok(match n {
        NonlinearExpr::UnknownDeriv { x, t } => TruncatedSeries {
            coeffs: terms.iter().map(|p| p.diff_n(Var::X, *x).diff_n(Var::T, *t)).collect(),
        },
        NonlinearExpr::Const(p) => TruncatedSeries::constant(p.clone(), order),
        NonlinearExpr::Add(v) => {
            let mut acc = TruncatedSeries::constant(Polynomial::zero(), order);
            for e in v {
                acc = acc.add(&compose_rec(e, terms)?);
            }
            acc
        }
        NonlinearExpr::Mul(v) => {
            let mut acc = TruncatedSeries::one(order);
            for e in v {
                acc = series_mul(&acc, &compose_rec(e, terms)?);
            }
            acc
        }
        NonlinearExpr::IntPow(b, e) => series_int_pow(&compose_rec(b, terms)?, *e)?,
    })
}

/// Decomposition polynomials for every available term: one per entry of `terms`.
pub fn adomian_list(n: &NonlinearExpr, terms: &[Polynomial]) -> Result<Vec<Polynomial>> {
    Ok(compose(n, terms, terms.len() - 1)?.coeffs)
}

#[derive(Debug, Clone)]
enum Node {
    Deriv { x: u32, t: u32 },
    Const(Polynomial),
    Add(Vec<usize>),
    Mul(usize, usize),
    Inv(usize),
}

/// Composition that grows one order at a time.
///
/// Each node of the compiled expression keeps its own coefficient list, so
/// pushing term `k` costs only the work for coefficient `k`.
#[derive(Debug, Clone)]
pub struct IncrementalComposer {
    nodes: Vec<Node>,
    coeffs: Vec<Vec<Polynomial>>,
    root: usize,
    order: Option<usize>,
}

impl IncrementalComposer {
    pub fn new(n: &NonlinearExpr) -> Result<Self> {
        Self::with_max_order(n, DEFAULT_MAX_DERIVATIVE_ORDER)
    }

    pub fn with_max_order(n: &NonlinearExpr, max_order: u32) -> Result<Self> {
        n.validate(max_order)?;
        let mut nodes = Vec::new();
        let root = compile(n, &mut nodes);
        let coeffs = vec![Vec::new(); nodes.len()];
        Ok(IncrementalComposer { nodes, coeffs, root, order: None })
    }

    /// Highest coefficient computed so far.
    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn coefficients(&self) -> &[Polynomial] {
        &self.coeffs[self.root]
    }

    /// Appends the next solution term and returns the next decomposition polynomial.
    pub fn push(&mut self, term: &Polynomial) -> Result<Polynomial> {
        let k = self.order.map_or(0, |o| o + 1);
        for i in 0..self.nodes.len() {
            let value = match &self.nodes[i] {
                Node::Deriv { x, t } => term.diff_n(Var::X, *x).diff_n(Var::T, *t),
                Node::Const(p) => {
                    if k == 0 {
                        p.clone()
                    } else {
                        Polynomial::zero()
                    }
                }
                Node::Add(children) => {
                    let mut acc = Polynomial::zero();
                    for &c in children {
                        acc = acc + &self.coeffs[c][k];
                    }
                    acc
                }
                Node::Mul(a, b) => cauchy_coeff(&self.coeffs[*a], &self.coeffs[*b], k),
                Node::Inv(a) => {
                    let a = &self.coeffs[*a];
                    if k == 0 {
                        Polynomial::constant(Rational::one() / leading_constant(&a[0])?)
                    } else {
                        let inv = &self.coeffs[i];
                        let lead = inv[0].as_constant().expect("constant inverse lead");
                        let mut acc = Polynomial::zero();
                        for j in 1..=k {
                            if a[j].is_zero() || inv[k - j].is_zero() {
                                continue;
                            }
                            acc = acc + &a[j] * &inv[k - j];
                        }
                        acc.scale(&-lead)
                    }
                }
            };
            self.coeffs[i].push(value);
        }
        self.order = Some(k);
        Ok(self.coeffs[self.root][k].clone())
    }
}

fn compile(n: &NonlinearExpr, nodes: &mut Vec<Node>) -> usize {
    let idx = match n {
        NonlinearExpr::UnknownDeriv { x, t } => push_node(nodes, Node::Deriv { x: *x, t: *t }),
        NonlinearExpr::Const(p) => push_node(nodes, Node::Const(p.clone())),
        NonlinearExpr::Add(v) => {
            let children = v.iter().map(|e| compile(e, nodes)).collect();
            push_node(nodes, Node::Add(children))
        }
        NonlinearExpr::Mul(v) => {
            let mut iter = v.iter();
            match iter.next() {
                None => push_node(nodes, Node::Const(Polynomial::one())),
                Some(first) => {
                    let mut acc = compile(first, nodes);
                    for e in iter {
                        let rhs = compile(e, nodes);
                        acc = push_node(nodes, Node::Mul(acc, rhs));
                    }
                    acc
                }
            }
        }
        NonlinearExpr::IntPow(b, e) => {
            let mut square = compile(b, nodes);
            if *e < 0 {
                square = push_node(nodes, Node::Inv(square));
            }
            let mut e = e.unsigned_abs();
            let mut result: Option<usize> = None;
            while e > 0 {
                if e & 1 == 1 {
                    result = Some(match result {
                        None => square,
                        Some(r) => push_node(nodes, Node::Mul(r, square)),
                    });
                }
                e >>= 1;
                if e > 0 {
                    square = push_node(nodes, Node::Mul(square, square));
                }
            }
            result.expect("nonzero exponent")
        }
    };
    idx
}

fn push_node(nodes: &mut Vec<Node>, node: Node) -> usize {
    nodes.push(node);
    nodes.len() - 1
}

impl fmt::Display for NonlinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearExpr::UnknownDeriv { x, t } => {
                for (name, order) in [("dx", *x), ("dt", *t)] {
                    match order {
                        0 => {}
                        1 => write!(f, "{name} ")?,
                        k => write!(f, "{name}^{k} ")?,
                    }
                }
                f.write_str("u")
            }
            NonlinearExpr::Const(p) => {
                let bare = p.is_zero() || (p.len() == 1 && p.terms().all(|(_, c)| c.is_positive()));
                if bare {
                    write!(f, "{p}")
                } else {
                    write!(f, "({p})")
                }
            }
            NonlinearExpr::Add(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            NonlinearExpr::Mul(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    match e {
                        NonlinearExpr::Add(_) => write!(f, "({e})")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
            NonlinearExpr::IntPow(b, n) => match b.as_ref() {
                NonlinearExpr::UnknownDeriv { .. } => write!(f, "{b}^{n}"),
                // these constants already print inside parentheses
                NonlinearExpr::Const(p) if p.len() > 1 || p.terms().any(|(_, c)| c.is_negative()) => {
                    write!(f, "{b}^{n}")
                }
                _ => write!(f, "({b})^{n}"),
            },
        }
    }
}

impl FromStr for NonlinearExpr {
    type Err = Error;

    /// Grammar:
    ///
    /// ```text
    /// expr   := ['-'] term (('+' | '-') term)*
    /// term   := factor (('*' factor) | ('/' integer))*
    /// factor := atom ['^' ['-'] integer]
    /// atom   := integer | t | x | c | eps | deriv | '(' expr ')'
    /// deriv  := (('dx' | 'dt') ['^' integer])* 'u'
    /// ```
    fn from_str(s: &str) -> Result<Self> {
        let tokens = lex(s)?;
        let mut p = ExprParser { tokens: &tokens, pos: 0, len: s.len() };
        let e = p.expr()?;
        if p.pos != tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct ExprParser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    len: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> Error {
        let offset = self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Error::Parse { offset, message: message.to_string() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Token::Num(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn small(&mut self) -> Result<u32> {
        let n = self.integer()?;
        n.to_u32().ok_or_else(|| self.error("integer too large"))
    }

    fn expr(&mut self) -> Result<NonlinearExpr> {
        let mut parts = Vec::new();
        let first = if self.eat('-') { negate(self.term()?) } else { self.term()? };
        parts.push(first);
        loop {
            if self.eat('+') {
                parts.push(self.term()?);
            } else if self.eat('-') {
                parts.push(negate(self.term()?));
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { NonlinearExpr::Add(parts) })
    }

    fn term(&mut self) -> Result<NonlinearExpr> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if self.eat('/') {
                let d = self.integer()?;
                if d.is_zero() {
                    return Err(self.error("division by zero"));
                }
                let last = factors.pop().unwrap();
                let inv = Rational::new(BigInt::one(), d);
                factors.push(match last {
                    NonlinearExpr::Const(p) => NonlinearExpr::Const(p.scale(&inv)),
                    other => NonlinearExpr::Mul(vec![other, NonlinearExpr::Const(inv.into())]),
                });
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { NonlinearExpr::Mul(factors) })
    }

    fn factor(&mut self) -> Result<NonlinearExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        let n = self.small()? as i64;
        let n = if negative { -n } else { n };
        let n = i32::try_from(n).map_err(|_| self.error("exponent too large"))?;
        if n == 0 {
            return Err(self.error("exponent must be nonzero"));
        }
        Ok(match base {
            NonlinearExpr::Const(p) if n > 0 => NonlinearExpr::Const(p.pow(n as u32)),
            b => NonlinearExpr::IntPow(Box::new(b), n),
        })
    }

    fn atom(&mut self) -> Result<NonlinearExpr> {
        match self.tokens.get(self.pos).cloned() {
            Some((_, Token::Num(n))) => {
                self.pos += 1;
                Ok(NonlinearExpr::Const(Polynomial::constant(Rational::from_integer(n))))
            }
            Some((_, Token::Sym('('))) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some((offset, Token::Ident(name))) => match name.as_str() {
                "u" | "dx" | "dt" => self.deriv(),
                other => {
                    let v: Var = other.parse().map_err(|_| Error::Parse {
                        offset,
                        message: format!("unknown symbol `{other}`"),
                    })?;
                    self.pos += 1;
                    Ok(NonlinearExpr::Const(Polynomial::var(v)))
                }
            },
            _ => Err(self.error("expected a number, variable, derivative or `(`")),
        }
    }

    fn deriv(&mut self) -> Result<NonlinearExpr> {
        let (mut x, mut t) = (0u32, 0u32);
        loop {
            match self.peek() {
                Some(Token::Ident(name)) if name == "u" => {
                    self.pos += 1;
                    return Ok(NonlinearExpr::UnknownDeriv { x, t });
                }
                Some(Token::Ident(name)) if name == "dx" || name == "dt" => {
                    let is_x = name == "dx";
                    self.pos += 1;
                    let k = if self.eat('^') { self.small()? } else { 1 };
                    if is_x {
                        x += k;
                    } else {
                        t += k;
                    }
                }
                _ => return Err(self.error("expected `u` after derivative operator")),
            }
        }
    }
}

fn negate(e: NonlinearExpr) -> NonlinearExpr {
    match e {
        NonlinearExpr::Const(p) => NonlinearExpr::Const(-p),
        other => NonlinearExpr::Mul(vec![NonlinearExpr::Const(Polynomial::from(-1)), other]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::rat;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn series(v: &[&str]) -> TruncatedSeries {
        TruncatedSeries::new(v.iter().map(|s| p(s)).collect())
    }

    #[test]
    fn multiplicative_identity() {
        let s = series(&["1 + t", "x", "c*t^2"]);
        assert_eq!(series_mul(&TruncatedSeries::one(2), &s), s);
    }

    #[test]
    fn heat_transfer_first_product_coefficient() {
        // (v0 + v1 s)(v0' + v1' s), coefficient of s: v0*v1' + v1*v0' = 1*(-c) + 0
        let v = series(&["1", "-c*t"]);
        let dv = v.map(|q| q.diff(Var::T));
        let prod = series_mul(&v, &dv);
        assert_eq!(prod.coeffs[1], p("-c"));
        assert_eq!(prod.coeffs[1].scale(&rat(1, 1)) * p("eps"), p("-c*eps"));
    }

    #[test]
    fn square_coefficient() {
        let s = series(&["1", "x", "t"]);
        let sq = series_mul(&s, &s);
        // coefficient of s^2: 2 u2 + u1^2
        assert_eq!(sq.coeffs[2], p("2*t + x^2"));
    }

    #[test]
    fn powers() {
        let one = TruncatedSeries::one(3);
        assert_eq!(series_int_pow(&one, -3).unwrap(), one);

        let v1 = p("-c*(19/80*x^2 - 19/120*x^3 + 19/480*x^4)");
        let s = TruncatedSeries::new(vec![Polynomial::one(), v1.clone()]);
        let cube_inv = series_int_pow(&s, -3).unwrap();
        // d/ds (1 + v1 s)^-3 at s = 0 is -3 v1
        assert_eq!(cube_inv.coeffs[1], v1.scale(&rat(-3, 1)));

        let s = series(&["1", "t", "0"]);
        assert_eq!(series_int_pow(&s, 2).unwrap(), series(&["1", "2*t", "t^2"]));
    }

    #[test]
    fn negative_power_needs_constant_lead() {
        let s = series(&["x", "1"]);
        assert_eq!(series_int_pow(&s, -1), Err(Error::NonInvertibleLeadingTerm));
        let s = series(&["0", "1"]);
        assert_eq!(series_int_pow(&s, -2), Err(Error::NonInvertibleLeadingTerm));
    }

    #[test]
    fn compose_examples() {
        let uux: NonlinearExpr = "u * dx u".parse().unwrap();
        assert_eq!(compose(&uux, &[p("x")], 0).unwrap().coeffs, vec![p("x")]);

        let heat: NonlinearExpr = "eps * u * dt u".parse().unwrap();
        let a = compose(&heat, &[p("1"), p("-t")], 1).unwrap();
        assert_eq!(a.coeffs, vec![Polynomial::zero(), p("-eps")]);
    }

    #[test]
    fn adomian_list_basics() {
        let n: NonlinearExpr = "u^2".parse().unwrap();
        assert_eq!(adomian_list(&n, &[p("1 + x")]).unwrap(), vec![p("(1 + x)^2")]);
    }

    #[test]
    fn incremental_matches_fresh() {
        for src in ["1/5*u^-3 + 1/2*u^-2 + 1/4*u^-1", "eps*u*dt u", "u*dx u + dx^2 dt u", "(u + x)^3*u^-2"] {
            let n: NonlinearExpr = src.parse().unwrap();
            let terms = vec![p("1"), p("x - c*t"), p("c^2*x^2 + t"), p("-x^3*c + 1/3*t*x")];
            let fresh = adomian_list(&n, &terms).unwrap();
            let mut inc = IncrementalComposer::new(&n).unwrap();
            let pushed: Vec<_> = terms.iter().map(|t| inc.push(t).unwrap()).collect();
            assert_eq!(pushed, fresh, "{src}");
        }
    }

    #[test]
    fn derivative_order_limit() {
        let n: NonlinearExpr = "dx^5 u".parse().unwrap();
        assert!(matches!(compose(&n, &[p("x")], 0), Err(Error::DerivativeOrderExceeded { .. })));
        assert!(compose_with_max(&n, &[p("x")], 0, 5).is_ok());
    }

    #[test]
    fn parse_and_display() {
        let n: NonlinearExpr = "1/5*u^-3 + 1/2*u^-2 + 1/4*u^-1".parse().unwrap();
        assert_eq!(n.to_string(), "1/5*u^-3 + 1/2*u^-2 + 1/4*u^-1");
        let n: NonlinearExpr = "dx^2 dt u - u*dx u".parse().unwrap();
        assert_eq!(n.derivative_orders(), vec![(0, 0), (1, 0), (2, 1)]);
        assert!("u^0".parse::<NonlinearExpr>().is_err());
        assert!("v + 1".parse::<NonlinearExpr>().is_err());
        assert!("dx".parse::<NonlinearExpr>().is_err());
    }

    #[test]
    fn numeric_evaluation_floor() {
        let n: NonlinearExpr = "u^-2".parse().unwrap();
        let r = n.eval_numeric(&|_, _| 1e-14, &|_| 0.0, 1e-12);
        assert!(matches!(r, Err(Error::DivisionNearZero { .. })));
        let r = n.eval_numeric(&|_, _| 0.5, &|_| 0.0, 1e-12).unwrap();
        assert_eq!(r, 4.0);
    }
}
