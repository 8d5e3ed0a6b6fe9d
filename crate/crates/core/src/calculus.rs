//! Linear operators: derivative combinations `R` and nested-integral inverses `L^-1`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ratpoly::{format_rational, Polynomial, Rational, Var};

/// `sum coeff * dx^a dt^b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearComb {
    terms: Vec<(Rational, u32, u32)>,
}

impl LinearComb {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::derivative(0, 0)
    }

    pub fn derivative(x: u32, t: u32) -> Self {
        Self::new([(Rational::one(), x, t)])
    }

    /// Merges duplicate `(a, b)` pairs and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (Rational, u32, u32)>) -> Self {
        let mut merged: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (c, a, b) in terms {
            *merged.entry((a, b)).or_insert_with(Rational::zero) += c;
        }
        LinearComb {
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((a, b), c)| (c, a, b))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(Rational, u32, u32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &LinearComb) -> LinearComb {
        LinearComb::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        apply_linear(self, p)
    }
}

impl fmt::Display for LinearComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, a, b)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*dx^{a} dt^{b}", format_rational(c))?;
        }
        Ok(())
    }
}

pub fn apply_linear(r: &LinearComb, p: &Polynomial) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (c, a, b) in &r.terms {
        let d = p.diff_n(Var::X, *a).diff_n(Var::T, *b);
        acc = acc + d.scale(c);
    }
    acc
}

/// Nested definite antiderivatives, innermost step first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversePlan {
    steps: Vec<(Var, Rational)>,
}

impl InversePlan {
    pub fn new(steps: Vec<(Var, Rational)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidProblem("inverse plan needs at least one step".into()));
        }
        if let Some((v, _)) = steps.iter().find(|(v, _)| !matches!(v, Var::T | Var::X)) {
            return Err(Error::InvalidProblem(format!(
                "inverse plan integrates over `{v}`; only t and x are independent variables"
            )));
        }
        Ok(InversePlan { steps })
    }

    /// `int_lower^t (.) dt`.
    pub fn single(v: Var, lower: Rational) -> Self {
        InversePlan { steps: vec![(v, lower)] }
    }

    pub fn steps(&self) -> &[(Var, Rational)] {
        &self.steps
    }

    /// The derivative operator `L` that this plan inverts.
    pub fn linear_operator(&self) -> LinearComb {
        let x = self.steps.iter().filter(|(v, _)| *v == Var::X).count() as u32;
        let t = self.steps.iter().filter(|(v, _)| *v == Var::T).count() as u32;
        LinearComb::derivative(x, t)
    }

    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        apply_inverse(self, p)
    }
}

pub fn apply_inverse(plan: &InversePlan, p: &Polynomial) -> Polynomial {
    plan.steps.iter().fold(p.clone(), |acc, (v, lower)| acc.antideriv(*v, lower))
}

/// `dx^x dt^t u` restricted to `var = at` must equal `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub x: u32,
    pub t: u32,
    pub var: Var,
    pub at: Rational,
    pub value: Polynomial,
}

impl Condition {
    pub fn new(x: u32, t: u32, var: Var, at: Rational, value: Polynomial) -> Self {
        Condition { x, t, var, at, value }
    }

    /// The same condition with a zero right-hand side.
    pub fn homogeneous(&self) -> Condition {
        Condition { value: Polynomial::zero(), ..self.clone() }
    }

    pub fn residual(&self, psi: &Polynomial) -> Polynomial {
        let d = psi.diff_n(Var::X, self.x).diff_n(Var::T, self.t);
        &d.substitute_value(self.var, &self.at) - &self.value
    }

    pub fn holds(&self, psi: &Polynomial) -> bool {
        self.residual(psi).is_zero()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut op = String::new();
        if self.x > 0 {
            op.push_str(&format!("dx^{} ", self.x));
        }
        if self.t > 0 {
            op.push_str(&format!("dt^{} ", self.t));
        }
        write!(f, "{op}u({}={}) = {}", self.var, format_rational(&self.at), self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks each condition on a single polynomial.
pub fn check_conditions(psi: &Polynomial, conditions: &[Condition]) -> ConditionReport {
    ConditionReport {
        checks: conditions
            .iter()
            .map(|c| {
                let r = c.residual(psi);
                ConditionCheck {
                    condition: c.clone(),
                    passed: r.is_zero(),
                    detail: if r.is_zero() { "exact".into() } else { format!("off by {r}") },
                }
            })
            .collect(),
    }
}

/// Verifies that every partial sum `phi + L^-1[g]` satisfies `conditions`:
/// `phi` must satisfy them as stated, and the image of `L^-1` must satisfy the
/// homogeneous versions. Linearity reduces the second part to checking the
/// images of a monomial basis; the basis covers total degree up to `probe_degree`
/// in the plan's variables, together with `c` and `eps` factors.
pub fn verify_conditions(
    plan: &InversePlan,
    phi: &Polynomial,
    conditions: &[Condition],
    probe_degree: u32,
) -> ConditionReport {
    let mut report = check_conditions(phi, conditions);
    for check in report.checks.iter_mut() {
        let hom = check.condition.homogeneous();
        for probe in probe_basis(probe_degree) {
            let image = apply_inverse(plan, &probe);
            let r = hom.residual(&image);
            if !r.is_zero() {
                check.passed = false;
                check.detail = format!("L^-1[{probe}] violates the homogeneous condition: {r}");
                break;
            }
        }
    }
    report
}

fn probe_basis(max_degree: u32) -> Vec<Polynomial> {
    let mut out = Vec::new();
    for a in 0..=max_degree {
        for b in 0..=(max_degree - a) {
            let m = Polynomial::var(Var::X).pow(a) * Polynomial::var(Var::T).pow(b);
            out.push(m.clone());
            out.push(m * Polynomial::var(Var::C) * Polynomial::var(Var::Eps));
        }
    }
    out
}
