//! The two recursions: classical decomposition and the `c`-parameterized variant.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::calculus::{apply_inverse, apply_linear};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::ratpoly::{Polynomial, Rational, Var};
use crate::series::{adomian_list, IncrementalComposer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adm,
    Admp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Adm => "ADM",
            Method::Admp => "ADMP",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ADM" => Ok(Method::Adm),
            "ADMP" => Ok(Method::Admp),
            other => Err(Error::Parse { offset: 0, message: format!("unknown method `{other}`") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesSolution {
    pub method: Method,
    pub problem_id: String,
    /// `u_k` or `v_k(., c)`; `terms.len() == order + 1`.
    pub terms: Vec<Polynomial>,
}

impl SeriesSolution {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    /// Same solution cut down to `order`.
    pub fn truncated(&self, order: usize) -> SeriesSolution {
        SeriesSolution {
            method: self.method,
            problem_id: self.problem_id.clone(),
            terms: self.terms[..=order.min(self.order())].to_vec(),
        }
    }
}

fn initial_term(problem: &ProblemSpec) -> Polynomial {
    &apply_inverse(&problem.inverse_plan, &problem.source) + &problem.phi
}

/// `L^-1[R(w) + D]` for a solution term `w` and its decomposition polynomial `D`.
fn increment(problem: &ProblemSpec, term: &Polynomial, decomposition: &Polynomial) -> Polynomial {
    let inner = &apply_linear(&problem.remainder, term) + decomposition;
    apply_inverse(&problem.inverse_plan, &inner)
}

/// `u_0 = L^-1[f] + phi`, `u_k = -L^-1[R(u_{k-1})] - L^-1[A_{k-1}]`.
pub fn adm_solve(problem: &ProblemSpec, n: usize) -> Result<SeriesSolution> {
    let mut composer = IncrementalComposer::new(&problem.nonlinearity)?;
    let mut terms = vec![initial_term(problem)];
    for k in 1..=n {
        let a = composer.push(&terms[k - 1])?;
        terms.push(-increment(problem, &terms[k - 1], &a));
    }
    Ok(SeriesSolution { method: Method::Adm, problem_id: problem.id.clone(), terms })
}

/// `v_0 = L^-1[f] + phi`, `v_1 = -c L^-1[R(v_0) + B_0]`,
/// `v_k = -c L^-1[R(v_{k-1}) + B_{k-1}] - (1-c) L^-1[R(v_{k-2}) + B_{k-2}]`,
/// with `c` kept symbolic.
pub fn admp_solve(problem: &ProblemSpec, n: usize) -> Result<SeriesSolution> {
    let c = Polynomial::var(Var::C);
    let minus_c = -&c;
    let c_minus_one = &c - &Polynomial::one();
    let mut composer = IncrementalComposer::new(&problem.nonlinearity)?;
    let mut terms = vec![initial_term(problem)];
    let mut increments: Vec<Polynomial> = Vec::with_capacity(n);
    for k in 1..=n {
        let b = composer.push(&terms[k - 1])?;
        increments.push(increment(problem, &terms[k - 1], &b));
        let mut v = &minus_c * &increments[k - 1];
        if k >= 2 {
            v = v + &c_minus_one * &increments[k - 2];
        }
        terms.push(v);
    }
    Ok(SeriesSolution { method: Method::Admp, problem_id: problem.id.clone(), terms })
}

/// `psi_m = sum_{k<=m} terms[k]`, optionally with `c` substituted.
pub fn partial_sum(sol: &SeriesSolution, m: usize, c_value: Option<&Rational>) -> Result<Polynomial> {
    if m > sol.order() {
        return Err(Error::IndexOutOfRange { index: m, order: sol.order() });
    }
    let sum = sol.terms[..=m].iter().fold(Polynomial::zero(), |acc, t| acc + t);
    Ok(match c_value {
        Some(c) => sum.substitute_value(Var::C, c),
        None => sum,
    })
}

/// All partial sums `psi_0 .. psi_n`.
pub fn partial_sums(sol: &SeriesSolution) -> Vec<Polynomial> {
    let mut acc = Polynomial::zero();
    sol.terms
        .iter()
        .map(|t| {
            acc = &acc + t;
            acc.clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationReport {
    pub checks: Vec<IdentityCheck>,
}

impl RelationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, lhs: &Polynomial, rhs: &Polynomial) {
        self.checks.push(IdentityCheck { name: name.to_string(), passed: lhs == rhs });
    }
}

fn c_poly() -> (Polynomial, Polynomial) {
    let c = Polynomial::var(Var::C);
    let one_minus_c = &Polynomial::one() - &c;
    (c, one_minus_c)
}

/// Lifts classical quantities `q_0..q_3` through the low-order relations
/// `w_0 = q_0`, `w_1 = c q_1`, `w_2 = c^2 q_2 + (1-c) q_1`, `w_3 = c^3 q_3 + 2c(1-c) q_2`.
fn lift(q: &[Polynomial]) -> Vec<Polynomial> {
    let (c, omc) = c_poly();
    let two = Polynomial::from(2);
    let mut out = Vec::new();
    if let Some(q0) = q.first() {
        out.push(q0.clone());
    }
    if q.len() > 1 {
        out.push(&c * &q[1]);
    }
    if q.len() > 2 {
        out.push(&c.pow(2) * &q[2] + &omc * &q[1]);
    }
    if q.len() > 3 {
        out.push(&c.pow(3) * &q[3] + &(&two * &c) * &(&omc * &q[2]));
    }
    out
}

/// Checks `v_0 = u_0`, `v_1 = c u_1`, `v_2 = c^2 u_2 + (1-c) u_1`,
/// `v_3 = c^3 u_3 + 2c(1-c) u_2` on as many terms as both solutions carry (up to 3).
pub fn relate_terms(adm: &SeriesSolution, admp: &SeriesSolution) -> RelationReport {
    let n = adm.order().min(admp.order()).min(3);
    let lifted = lift(&adm.terms[..=n]);
    let mut report = RelationReport::default();
    for (k, rhs) in lifted.iter().enumerate() {
        report.push(&format!("v_{k} = lift(u)_{k}"), &admp.terms[k], rhs);
    }
    report
}

/// Same identities for the decomposition polynomials: `B_0 = A_0`, `B_1 = c A_1`,
/// `B_2 = c^2 A_2 + (1-c) A_1`, `B_3 = c^3 A_3 + 2c(1-c) A_2`.
pub fn relate_decomposition_polynomials(
    problem: &ProblemSpec,
    adm: &SeriesSolution,
    admp: &SeriesSolution,
) -> Result<RelationReport> {
    let n = adm.order().min(admp.order()).min(3);
    let a = adomian_list(&problem.nonlinearity, &adm.terms[..=n])?;
    let b = adomian_list(&problem.nonlinearity, &admp.terms[..=n])?;
    let lifted = lift(&a);
    let mut report = RelationReport::default();
    for (k, rhs) in lifted.iter().enumerate() {
        report.push(&format!("B_{k} = lift(A)_{k}"), &b[k], rhs);
    }
    Ok(report)
}

/// `v_k` at `c = 1` equals `u_k` for every shared index.
pub fn collapses_at_unit_c(adm: &SeriesSolution, admp: &SeriesSolution) -> bool {
    let one = Rational::one();
    adm.terms
        .iter()
        .zip(admp.terms.iter())
        .all(|(u, v)| &v.substitute_value(Var::C, &one) == u)
}

impl fmt::Display for SeriesSolution {
    /// ```text
    /// method: ADMP
    /// problem: burgers
    /// order: 1
    /// term 0: x
    /// term 1: -t*x*c
    /// ```
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method: {}", self.method)?;
        writeln!(f, "problem: {}", self.problem_id)?;
        writeln!(f, "order: {}", self.order())?;
        for (k, t) in self.terms.iter().enumerate() {
            writeln!(f, "term {k}: {t}")?;
        }
        Ok(())
    }
}

impl FromStr for SeriesSolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse { offset: 0, message: m };
        let mut method = None;
        let mut problem_id = None;
        let mut order = None;
        let mut terms = Vec::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line.split_once(':').ok_or_else(|| bad(format!("missing `:` in `{line}`")))?;
            let value = value.trim();
            match key.trim() {
                "method" => method = Some(value.parse()?),
                "problem" => problem_id = Some(value.to_string()),
                "order" => order = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                k if k.starts_with("term ") => {
                    let idx: usize = k[5..].trim().parse().map_err(|_| bad(format!("bad term key `{k}`")))?;
                    if idx != terms.len() {
                        return Err(bad(format!("term {idx} out of sequence")));
                    }
                    terms.push(value.parse()?);
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let method = method.ok_or_else(|| bad("missing method".into()))?;
        let problem_id = problem_id.ok_or_else(|| bad("missing problem".into()))?;
        let order = order.ok_or_else(|| bad("missing order".into()))?;
        if terms.len() != order + 1 {
            return Err(bad(format!("order {order} but {} terms", terms.len())));
        }
        Ok(SeriesSolution { method, problem_id, terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{catalog, ProblemId};
    use crate::ratpoly::int;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn heat_transfer_adm_terms() {
        let problem = catalog(ProblemId::HeatTransfer).unwrap();
        let sol = adm_solve(&problem, 3).unwrap();
        assert_eq!(
            sol.terms,
            vec![p("1"), p("-t"), p("eps*t + 1/2*t^2"), p("-eps^2*t - 3/2*eps*t^2 - 1/6*t^3")]
        );
    }

    #[test]
    fn order_zero_is_initial_term() {
        for id in ProblemId::ALL {
            let problem = catalog(id).unwrap();
            for sol in [adm_solve(&problem, 0).unwrap(), admp_solve(&problem, 0).unwrap()] {
                assert_eq!(sol.terms, vec![problem.phi.clone()]);
            }
        }
    }

    #[test]
    fn admp_examples() {
        let heat = admp_solve(&catalog(ProblemId::HeatTransfer).unwrap(), 2).unwrap();
        assert_eq!(heat.terms[2], p("(c - 1 + c^2*eps)*t + 1/2*c^2*t^2"));
        let nems = admp_solve(&catalog(ProblemId::NemsVdw).unwrap(), 1).unwrap();
        assert_eq!(nems.terms[1], p("-c*(19/80*x^2 - 19/120*x^3 + 19/480*x^4)"));
        let rlw = admp_solve(&catalog(ProblemId::Rlw).unwrap(), 1).unwrap();
        assert_eq!(partial_sum(&rlw, 1, None).unwrap(), p("x - c*t - c*x*t"));
    }

    #[test]
    fn burgers_adm_matches_unit_c() {
        let problem = catalog(ProblemId::Burgers).unwrap();
        let adm = adm_solve(&problem, 2).unwrap();
        let from_paper = p("(1 - t + c^2*t^2)*x").substitute_value(Var::C, &int(1));
        assert_eq!(partial_sum(&adm, 2, None).unwrap(), from_paper);
    }

    #[test]
    fn partial_sums_and_bounds() {
        let problem = catalog(ProblemId::Burgers).unwrap();
        let sol = admp_solve(&problem, 4).unwrap();
        assert_eq!(partial_sum(&sol, 0, None).unwrap(), sol.terms[0]);
        assert_eq!(
            partial_sum(&sol, 4, None).unwrap(),
            p("(1 - t + t^2 + 2*c^3*t^3 - 3*c^2*t^3 + c^4*t^4)*x")
        );
        assert_eq!(partial_sums(&sol)[3], partial_sum(&sol, 3, None).unwrap());
        assert!(matches!(partial_sum(&sol, 5, None), Err(Error::IndexOutOfRange { .. })));

        let heat = admp_solve(&catalog(ProblemId::HeatTransfer).unwrap(), 3).unwrap();
        let slope = partial_sum(&heat, 3, None).unwrap().diff(Var::T).substitute_value(Var::T, &int(0));
        assert_eq!(slope, p("-1 + (2*c - c^2)*eps - c^3*eps^2"));
    }

    #[test]
    fn relations() {
        for id in [ProblemId::HeatTransfer, ProblemId::NemsVdw] {
            let problem = catalog(id).unwrap();
            let adm = adm_solve(&problem, 3).unwrap();
            let admp = admp_solve(&problem, 3).unwrap();
            let report = relate_terms(&adm, &admp);
            assert_eq!(report.checks.len(), 4);
            assert!(report.all_passed(), "{id:?} {report:?}");
            assert!(collapses_at_unit_c(&adm, &admp));
        }
    }

    #[test]
    fn relation_detects_mismatch() {
        let problem = catalog(ProblemId::HeatTransfer).unwrap();
        let adm = adm_solve(&problem, 3).unwrap();
        let mut admp = admp_solve(&problem, 3).unwrap();
        admp.terms[2] = &admp.terms[2] + &p("t");
        let report = relate_terms(&adm, &admp);
        assert!(!report.checks[2].passed);
        assert!(report.checks[1].passed);
    }

    #[test]
    fn text_round_trip() {
        let sol = admp_solve(&catalog(ProblemId::Rlw).unwrap(), 3).unwrap();
        let text = sol.to_string();
        assert!(text.starts_with("method: ADMP\nproblem: rlw\norder: 3\nterm 0: x\n"));
        assert_eq!(text.parse::<SeriesSolution>().unwrap(), sol);
        assert!("method: ADM\nproblem: x\norder: 2\nterm 0: 1\n".parse::<SeriesSolution>().is_err());
    }
}
