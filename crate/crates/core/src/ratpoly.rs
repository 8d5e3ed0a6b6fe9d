//! Exact multivariate polynomials over arbitrary-precision rationals.
//!
//! Variables come from the closed registry `{t, x, c, eps}`. A [`Polynomial`]
//! is a sparse map from [`Monomial`] to a nonzero [`Rational`]; the map is kept
//! canonical so structural equality is mathematical equality.
//!
//! The text form is `num/den*t^a*x^b*c^d*eps^e` per term, unit factors elided,
//! terms in graded order (total degree ascending, ties broken with `t` before
//! `x` before `c` before `eps`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds `num/den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-19/80"` or `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse {
        offset: 0,
        message: format!("`{s}` is not a rational number"),
    };
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let frac = Rational::new(frac, scale);
        let whole = Rational::from_integer(whole);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `n` or `n/d`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    C,
    Eps,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::T, Var::X, Var::C, Var::Eps];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::C => "c",
            Var::Eps => "eps",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(Var::T),
            "x" => Ok(Var::X),
            "c" => Ok(Var::C),
            "eps" => Ok(Var::Eps),
            other => Err(Error::UnknownVariable(other.to_string())),
        }
    }
}

/// Exponent vector over `(t, x, c, eps)`; a zero entry means the variable is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u32; 4]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 4]);

    pub fn var(v: Var, exp: u32) -> Self {
        let mut e = [0; 4];
        e[v.index()] = exp;
        Monomial(e)
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0[v.index()]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; 4]
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        Monomial(e)
    }

    fn with_exp(&self, v: Var, exp: u32) -> Monomial {
        let mut e = self.0;
        e[v.index()] = exp;
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in Var::ALL {
            let e = self.exp(v);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(value: Rational) -> Self {
        Self::monomial(value, Monomial::ONE)
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(Rational::one(), Monomial::var(v, 1))
    }

    pub fn monomial(coeff: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        Polynomial { terms }
    }

    /// Builds a polynomial from possibly repeated or zero terms.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(iter: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Some(value)` when the polynomial has no variables (zero included).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) > 0)
    }

    pub fn variables(&self) -> Vec<Var> {
        Var::ALL.into_iter().filter(|&v| self.contains(v)).collect()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn diff(&self, v: Var) -> Polynomial {
        let i = v.index();
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            out.insert(m.with_exp(v, e - 1), c * BigInt::from(e));
        }
        Polynomial { terms: out }
    }

    pub fn diff_n(&self, v: Var, n: u32) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..n {
            if p.is_zero() {
                break;
            }
            p = p.diff(v);
        }
        p
    }

    /// Definite antiderivative `q(v) - q(lower)` where `q` has zero constant term in `v`.
    pub fn antideriv(&self, v: Var, lower: &Rational) -> Polynomial {
        let mut q = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v) + 1;
            q.add_term(m.with_exp(v, e), c / BigInt::from(e));
        }
        if lower.is_zero() {
            return q;
        }
        let at_lower = q.substitute_value(v, lower);
        &q - &at_lower
    }

    pub fn substitute_value(&self, v: Var, value: &Rational) -> Polynomial {
        let mut out = Polynomial::zero();
        let max = self.degree_in(v) as usize;
        let mut powers = Vec::with_capacity(max + 1);
        powers.push(Rational::one());
        for k in 1..=max {
            powers.push(&powers[k - 1] * value);
        }
        for (m, c) in &self.terms {
            let e = m.exp(v) as usize;
            out.add_term(m.with_exp(v, 0), c * &powers[e]);
        }
        out
    }

    /// Replaces every occurrence of `v` with `q`.
    pub fn substitute(&self, v: Var, q: &Polynomial) -> Polynomial {
        if let Some(value) = q.as_constant() {
            return self.substitute_value(v, &value);
        }
        // Horner in `v` over the coefficient polynomials.
        let coeffs = self.coefficients_in(v);
        let mut acc = Polynomial::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * q) + c;
        }
        acc
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `v`,
    /// index = power of `v`. Always has at least one entry.
    pub fn coefficients_in(&self, v: Var) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            out[m.exp(v) as usize].add_term(m.with_exp(v, 0), c.clone());
        }
        out
    }

    pub fn eval_exact(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational> {
        self.check_bound(|v| point.contains_key(&v))?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for v in Var::ALL {
                let e = m.exp(v);
                if e > 0 {
                    term *= num_traits::pow(point[&v].clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Float evaluation: coefficients are converted from the exact rationals,
    /// then accumulated with nested Horner steps over `t, x, c, eps`.
    pub fn eval_f64(&self, point: &BTreeMap<Var, f64>) -> Result<f64> {
        self.check_bound(|v| point.contains_key(&v))?;
        Ok(self.to_float().eval(point))
    }

    fn check_bound(&self, bound: impl Fn(Var) -> bool) -> Result<()> {
        for v in Var::ALL {
            if self.contains(v) && !bound(v) {
                return Err(Error::UnboundVariable(v));
            }
        }
        Ok(())
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly::new(
            self.terms
                .iter()
                .map(|(m, c)| (m.0, rational_to_f64(c)))
                .collect(),
        )
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                f.write_str(&format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&abs))?;
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = lex(s)?;
        let mut p = PolyParser { tokens: &tokens, pos: 0, len: s.len() };
        let out = p.expr()?;
        if p.pos != tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }
}

impl From<Var> for Polynomial {
    fn from(v: Var) -> Self {
        Polynomial::var(v)
    }
}

impl From<Rational> for Polynomial {
    fn from(r: Rational) -> Self {
        Polynomial::constant(r)
    }
}

impl From<i64> for Polynomial {
    fn from(n: i64) -> Self {
        Polynomial::constant(int(n))
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let prod = ca * cb;
                let m = ma.mul(mb);
                match acc.get_mut(&m) {
                    Some(existing) => *existing += prod,
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { terms: acc }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $f:ident),*) => {$(
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial { (&self).$f(&rhs) }
        }
        impl<'a> $tr<&'a Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &Polynomial) -> Polynomial { (&self).$f(rhs) }
        }
        impl<'a> $tr<Polynomial> for &'a Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial { self.$f(&rhs) }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Polynomial with `f64` coefficients, used only at numeric evaluation boundaries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatPoly {
    // sorted lexicographically by exponent vector, descending
    terms: Vec<([u32; 4], f64)>,
}

impl FloatPoly {
    fn new(mut terms: Vec<([u32; 4], f64)>) -> Self {
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        FloatPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &BTreeMap<Var, f64>) -> f64 {
        self.eval_values(&Var::ALL.map(|v| point.get(&v).copied().unwrap_or(0.0)))
    }

    /// Evaluation with values indexed by [`Var::index`].
    pub fn eval_values(&self, values: &[f64; 4]) -> f64 {
        horner(&self.terms, 0, values)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.terms.iter().any(|(e, _)| e[v.index()] > 0)
    }

    /// Binds `v` to a number, returning a polynomial in the remaining variables.
    pub fn bind(&self, v: Var, value: f64) -> FloatPoly {
        let i = v.index();
        let mut acc: BTreeMap<[u32; 4], f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut key = *e;
            key[i] = 0;
            *acc.entry(key).or_insert(0.0) += c * value.powi(e[i] as i32);
        }
        FloatPoly::new(acc.into_iter().collect())
    }
}

fn horner(terms: &[([u32; 4], f64)], var: usize, values: &[f64; 4]) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    if var == 4 {
        return terms.iter().map(|(_, c)| c).sum();
    }
    let x = values[var];
    let mut acc = 0.0;
    let mut prev: Option<u32> = None;
    let mut start = 0;
    while start < terms.len() {
        let e = terms[start].0[var];
        let mut end = start;
        while end < terms.len() && terms[end].0[var] == e {
            end += 1;
        }
        let inner = horner(&terms[start..end], var + 1, values);
        acc = match prev {
            Some(p) => acc * x.powi((p - e) as i32) + inner,
            None => inner,
        };
        prev = Some(e);
        start = end;
    }
    acc * x.powi(prev.unwrap_or(0) as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

pub(crate) fn lex(s: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Token::Num(s[start..i].parse().expect("digits"))));
        } else if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(s[start..i].to_string())));
        } else if b"+-*/^()".contains(&b) {
            out.push((i, Token::Sym(b as char)));
            i += 1;
        } else {
            return Err(Error::Parse {
                offset: i,
                message: format!("unexpected character `{}`", b as char),
            });
        }
    }
    Ok(out)
}

struct PolyParser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    len: usize,
}

impl PolyParser<'_> {
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

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = if self.eat('-') {
            -self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc * self.factor()?;
            } else if self.eat('/') {
                let divisor = self.factor()?;
                match divisor.as_constant() {
                    Some(d) if !d.is_zero() => acc = acc.scale(&(Rational::one() / d)),
                    _ => return Err(self.error("division only by a nonzero constant")),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.tokens.get(self.pos) {
                Some((_, Token::Num(n))) => {
                    let e = n.to_u32().ok_or_else(|| self.error("exponent too large"))?;
                    self.pos += 1;
                    Ok(base.pow(e))
                }
                _ => Err(self.error("expected a non-negative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.tokens.get(self.pos).cloned() {
            Some((_, Token::Num(n))) => {
                self.pos += 1;
                Ok(Polynomial::constant(Rational::from_integer(n)))
            }
            Some((offset, Token::Ident(name))) => {
                self.pos += 1;
                let v: Var = name.parse().map_err(|e| match e {
                    Error::UnknownVariable(n) => Error::Parse {
                        offset,
                        message: format!("unknown variable `{n}` (allowed: t, x, c, eps)"),
                    },
                    other => other,
                })?;
                Ok(Polynomial::var(v))
            }
            Some((_, Token::Sym('('))) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some((_, Token::Sym('-'))) => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn additive_inverse() {
        assert!((p("t") + p("-t")).is_zero());
    }

    #[test]
    fn burgers_first_order_product() {
        assert_eq!(p("1 - c*t") * p("x"), p("x - c*t*x"));
    }

    #[test]
    fn product_matches_distributive_oracle() {
        let a = p("t + 1/2*t^2");
        let b = p("t - 1");
        // pairwise monomial products, summed by hand
        let mut oracle = Polynomial::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                oracle = oracle + Polynomial::monomial(ca * cb, ma.mul(mb));
            }
        }
        let prod = &a * &b;
        assert_eq!(prod, oracle);
        // (t + t^2/2)(t - 1) = t^3/2 + t^2/2 - t
        assert_eq!(prod, p("1/2*t^3 + 1/2*t^2 - t"));
    }

    #[test]
    fn derivatives() {
        assert!(Polynomial::one().diff(Var::T).is_zero());
        assert_eq!(p("-c*t").diff(Var::T), p("-c"));
        let q = p("19/480*x^4 - 19/120*x^3 + 19/80*x^2");
        assert_eq!(q.diff_n(Var::X, 4), p("19/20"));
    }

    #[test]
    fn antiderivatives() {
        assert_eq!(Polynomial::one().antideriv(Var::T, &int(0)), p("t"));
        assert_eq!(p("t").antideriv(Var::T, &int(0)), p("1/2*t^2"));
        let r = p("x - 1").antideriv(Var::X, &int(1));
        let expected = p("(x - 1)^2/2");
        for k in 0..20 {
            let point = BTreeMap::from([(Var::X, rat(k * 7 - 30, 11))]);
            assert_eq!(r.eval_exact(&point).unwrap(), expected.eval_exact(&point).unwrap());
        }
        assert_eq!(r, p("1/2*x^2 - x + 1/2"));
    }

    #[test]
    fn evaluation() {
        let psi = p("x - c*t*x");
        let pt = BTreeMap::from([(Var::X, int(1)), (Var::T, int(0))]);
        assert_eq!(psi.eval_exact(&pt), Err(Error::UnboundVariable(Var::C)));
        assert_eq!(psi.substitute_value(Var::C, &int(1)).eval_exact(&pt).unwrap(), int(1));

        let q = p("-1 + c^2*eps");
        let pt = BTreeMap::from([(Var::C, int(1)), (Var::Eps, int(2))]);
        assert_eq!(q.eval_exact(&pt).unwrap(), int(1));

        let alphas = rat(1, 5) + rat(1, 2) + rat(1, 4);
        assert_eq!(Polynomial::constant(alphas).eval_exact(&BTreeMap::new()).unwrap(), rat(19, 20));
    }

    #[test]
    fn float_eval_matches_exact() {
        let q = p("19/480*x^4 - 19/120*x^3*c + 3*t^2*x - eps + 7/3");
        let exact = BTreeMap::from([
            (Var::X, rat(3, 7)),
            (Var::C, rat(-5, 4)),
            (Var::T, rat(1, 3)),
            (Var::Eps, rat(2, 9)),
        ]);
        let float: BTreeMap<Var, f64> = exact.iter().map(|(v, r)| (*v, rational_to_f64(r))).collect();
        let e = rational_to_f64(&q.eval_exact(&exact).unwrap());
        let f = q.eval_f64(&float).unwrap();
        assert!((e - f).abs() < 1e-14, "{e} vs {f}");
        let bound = q.to_float().bind(Var::C, -1.25).bind(Var::Eps, 2.0 / 9.0);
        assert!((bound.eval(&float) - e).abs() < 1e-14);
    }

    #[test]
    fn substitution() {
        let v2 = p("(c - 1 + c^2*eps)*t + 1/2*c^2*t^2");
        assert_eq!(v2.substitute(Var::C, &Polynomial::one()), p("eps*t + 1/2*t^2"));
        assert_eq!(v2.substitute(Var::C, &p("c")), v2);
        let r = p("-c").substitute(Var::C, &Polynomial::constant(rat(1, 4)));
        assert_eq!(r, Polynomial::constant(rat(-1, 4)));
        let s = p("c^2 + x").substitute(Var::C, &p("t + 1"));
        assert_eq!(s, p("t^2 + 2*t + 1 + x"));
    }

    #[test]
    fn canonical_text() {
        assert_eq!(p("x*(1 - c*t)").to_string(), "x - t*x*c");
        assert_eq!(p("eps*t + t^2/2").to_string(), "1/2*t^2 + t*eps");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("-1 + eps*c^2").to_string(), "-1 + c^2*eps");
        assert_eq!(p("t - 1 + x").to_string(), "-1 + t + x");
    }

    #[test]
    fn rejects_unknown_variables() {
        assert!(matches!("y + 1".parse::<Polynomial>(), Err(Error::Parse { .. })));
        assert!(matches!("w".parse::<Var>(), Err(Error::UnknownVariable(_))));
        assert!("x / t".parse::<Polynomial>().is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-19/80").unwrap(), rat(-19, 80));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
    }
}
