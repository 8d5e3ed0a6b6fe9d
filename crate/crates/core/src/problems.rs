//! Problem statements: the built-in catalog and the TOML problem-file format.
//!
//! A problem is `L[u] + R[u] + N[u] = f` where `L` is the derivative operator
//! inverted by an [`InversePlan`], `R` a [`LinearComb`] and `N` a
//! [`NonlinearExpr`]. The initial/boundary data enter through `phi`.
//!
//! Problem files look like this (the NEMS cantilever):
//!
//! ```toml
//! id = "nems_vdw"
//! independent_vars = ["x"]
//! inverse_plan = [["x", 1], ["x", 1], ["x", 0], ["x", 0]]   # innermost first
//! remainder = []                                           # [coeff, x-order, t-order]
//! nonlinearity = "1/5*u^-3 + 1/2*u^-2 + 1/4*u^-1"
//! phi = "1"
//! f = "0"
//! conditions = [[0, 0, "x", 0, "1"], [1, 0, "x", 0, "0"], [2, 0, "x", 1, "0"], [3, 0, "x", 1, "0"]]
//! domain = [["x", 0, 1]]
//!
//! [grid]
//! label = "x_j = j/20, j = 1..20"
//! axes = [["x", "1/20", "1/20", 20]]                       # [var, start, step, count]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{One, Zero};
use serde::Deserialize;

use crate::calculus::{verify_conditions, Condition, InversePlan, LinearComb};
use crate::error::{Error, Result};
use crate::ratpoly::{format_rational, int, parse_rational, rat, Polynomial, Rational, Var};
use crate::residual::{GridAxis, SampleGrid};
use crate::scheme::{admp_solve, partial_sum};
use crate::series::{NonlinearExpr, DEFAULT_MAX_DERIVATIVE_ORDER};

/// Closed form `numerator / base^power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub numerator: Polynomial,
    pub base: Polynomial,
    pub power: u32,
    pub description: String,
}

impl ExactSolution {
    pub fn new(numerator: Polynomial, denominator: Polynomial, description: impl Into<String>) -> Self {
        ExactSolution { numerator, base: denominator, power: 1, description: description.into() }
    }

    /// Partial derivative via `d(n / q^m) = (n' q - m n q') / q^(m+1)`.
    pub fn diff(&self, v: Var) -> ExactSolution {
        let m = Polynomial::constant(int(self.power as i64));
        let numerator = &self.numerator.diff(v) * &self.base - &(&m * &self.numerator) * &self.base.diff(v);
        ExactSolution {
            numerator,
            base: self.base.clone(),
            power: self.power + 1,
            description: format!("d{v}[{}]", self.description),
        }
    }

    pub fn derivative(&self, x: u32, t: u32) -> ExactSolution {
        let mut out = self.clone();
        for _ in 0..x {
            out = out.diff(Var::X);
        }
        for _ in 0..t {
            out = out.diff(Var::T);
        }
        out
    }

    pub fn eval_exact(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational> {
        let n = self.numerator.eval_exact(point)?;
        let q = self.base.eval_exact(point)?;
        if q.is_zero() {
            return Err(Error::DivisionNearZero { value: 0.0, floor: 0.0 });
        }
        Ok(n / num_traits::pow(q, self.power as usize))
    }

    pub fn eval_f64(&self, point: &BTreeMap<Var, f64>) -> Result<f64> {
        let n = self.numerator.eval_f64(point)?;
        let q = self.base.eval_f64(point)?;
        Ok(n / q.powi(self.power as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: String,
    pub independent_vars: Vec<Var>,
    pub inverse_plan: InversePlan,
    pub remainder: LinearComb,
    pub nonlinearity: NonlinearExpr,
    pub source: Polynomial,
    pub phi: Polynomial,
    pub conditions: Vec<Condition>,
    pub default_grid: SampleGrid,
    /// Axis-aligned box used for maxima and field dumps.
    pub domain: Vec<(Var, f64, f64)>,
    pub exact: Option<ExactSolution>,
    pub parameters: BTreeMap<String, Rational>,
    pub note: Option<String>,
}

impl ProblemSpec {
    /// `L` as a derivative combination, recovered from the inverse plan.
    pub fn linear_operator(&self) -> LinearComb {
        self.inverse_plan.linear_operator()
    }

    /// `L + R`.
    pub fn full_linear(&self) -> LinearComb {
        self.linear_operator().plus(&self.remainder)
    }

    /// Structural checks plus exact verification of the conditions.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidProblem(format!("{}: {m}", self.id)));
        if self.independent_vars.is_empty() {
            return invalid("no independent variables".into());
        }
        self.nonlinearity.validate(DEFAULT_MAX_DERIVATIVE_ORDER)?;
        for (v, _) in self.inverse_plan.steps() {
            if !self.independent_vars.contains(v) {
                return invalid(format!("inverse plan integrates over `{v}`, not an independent variable"));
            }
        }
        for point in self.default_grid.points() {
            for v in &self.independent_vars {
                if !point.contains_key(v) {
                    return invalid(format!("grid point does not bind `{v}`"));
                }
            }
            if let Some(v) = point.keys().find(|v| !self.independent_vars.contains(v)) {
                return invalid(format!("grid binds `{v}`, which is not an independent variable"));
            }
        }
        for (v, lo, hi) in &self.domain {
            if !self.independent_vars.contains(v) || !(lo < hi) {
                return invalid(format!("bad domain axis {v} in [{lo}, {hi}]"));
            }
        }
        let report = verify_conditions(&self.inverse_plan, &self.phi, &self.conditions, 6);
        if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
            return invalid(format!("condition {} fails: {}", bad.condition, bad.detail));
        }
        Ok(())
    }

    /// The same problem with a parameter such as `eps` fixed to `value`.
    pub fn bind(&self, v: Var, value: &Rational) -> ProblemSpec {
        let mut out = self.clone();
        out.nonlinearity = self.nonlinearity.substitute_value(v, value);
        out.source = self.source.substitute_value(v, value);
        out.phi = self.phi.substitute_value(v, value);
        for c in out.conditions.iter_mut() {
            c.value = c.value.substitute_value(v, value);
        }
        if let Some(e) = out.exact.as_mut() {
            e.numerator = e.numerator.substitute_value(v, value);
            e.base = e.base.substitute_value(v, value);
        }
        out.parameters.insert(v.name().to_string(), value.clone());
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ProblemSpec> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        ProblemSpec::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<ProblemSpec> {
        let file: ProblemFile =
            toml::from_str(text).map_err(|e| Error::InvalidProblem(e.message().to_string()))?;
        file.into_spec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    HeatTransfer,
    NemsVdw,
    Burgers,
    Rlw,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] =
        [ProblemId::HeatTransfer, ProblemId::NemsVdw, ProblemId::Burgers, ProblemId::Rlw];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::HeatTransfer => "heat_transfer",
            ProblemId::NemsVdw => "nems_vdw",
            ProblemId::Burgers => "burgers",
            ProblemId::Rlw => "rlw",
        }
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

pub fn catalog_by_name(id: &str) -> Result<ProblemSpec> {
    catalog(id.parse()?)
}

pub fn catalog(id: ProblemId) -> Result<ProblemSpec> {
    let spec = match id {
        ProblemId::HeatTransfer => heat_transfer(),
        ProblemId::NemsVdw => nems_vdw(),
        ProblemId::Burgers => wave_problem(id),
        ProblemId::Rlw => wave_problem(id),
    };
    spec.validate()?;
    Ok(spec)
}

fn uniform_axis(var: Var, start: Rational, step: Rational, count: usize) -> GridAxis {
    GridAxis { var, start, step, count }
}

/// `(1 + eps u) u' + u = 0`, `u(0) = 1`.
fn heat_transfer() -> ProblemSpec {
    let grid = SampleGrid::tensor(
        &[uniform_axis(Var::T, rat(1, 20), rat(1, 20), 20)],
        "t_j = j/20, j = 1..20",
    );
    ProblemSpec {
        id: ProblemId::HeatTransfer.name().into(),
        independent_vars: vec![Var::T],
        inverse_plan: InversePlan::single(Var::T, int(0)),
        remainder: LinearComb::identity(),
        nonlinearity: NonlinearExpr::constant(Polynomial::var(Var::Eps))
            .times(NonlinearExpr::u())
            .times(NonlinearExpr::deriv(0, 1)),
        source: Polynomial::zero(),
        phi: Polynomial::one(),
        conditions: vec![Condition::new(0, 0, Var::T, int(0), Polynomial::one())],
        default_grid: grid,
        domain: vec![(Var::T, 0.0, 1.0)],
        exact: None,
        parameters: BTreeMap::new(),
        note: Some("closed form unknown; u'(0) = -1/(1+eps); optimal c = 1/(1+eps) analytically".into()),
    }
}

/// `u'''' + a3/u^3 + a2/u^2 + a1/u = 0` with a clamped end at 0 and a free end at 1.
fn nems_vdw() -> ProblemSpec {
    let parameters = BTreeMap::from([
        ("alpha3".to_string(), rat(1, 5)),
        ("alpha2".to_string(), rat(1, 2)),
        ("alpha1".to_string(), rat(1, 4)),
    ]);
    let term = |name: &str, k: i32| {
        NonlinearExpr::constant(Polynomial::constant(parameters[name].clone()))
            .times(NonlinearExpr::u().pow(-k))
    };
    let nonlinearity = NonlinearExpr::Add(vec![term("alpha3", 3), term("alpha2", 2), term("alpha1", 1)]);
    let plan = InversePlan::new(vec![(Var::X, int(1)), (Var::X, int(1)), (Var::X, int(0)), (Var::X, int(0))])
        .expect("valid plan");
    ProblemSpec {
        id: ProblemId::NemsVdw.name().into(),
        independent_vars: vec![Var::X],
        inverse_plan: plan,
        remainder: LinearComb::zero(),
        nonlinearity,
        source: Polynomial::zero(),
        phi: Polynomial::one(),
        conditions: vec![
            Condition::new(0, 0, Var::X, int(0), Polynomial::one()),
            Condition::new(1, 0, Var::X, int(0), Polynomial::zero()),
            Condition::new(2, 0, Var::X, int(1), Polynomial::zero()),
            Condition::new(3, 0, Var::X, int(1), Polynomial::zero()),
        ],
        default_grid: SampleGrid::tensor(
            &[uniform_axis(Var::X, rat(1, 20), rat(1, 20), 20)],
            "x_j = j/20, j = 1..20",
        ),
        domain: vec![(Var::X, 0.0, 1.0)],
        exact: None,
        parameters,
        note: None,
    }
}

/// Burgers' `u_t + u u_x + u_xxt = 0` and RLW `u_t + u_x + u u_x + u_xxt = 0`, both with `u(x, 0) = x`.
fn wave_problem(id: ProblemId) -> ProblemSpec {
    let x = Polynomial::var(Var::X);
    let t = Polynomial::var(Var::T);
    let (remainder, exact) = match id {
        ProblemId::Burgers => (
            LinearComb::derivative(2, 1),
            ExactSolution::new(x.clone(), &Polynomial::one() + &t, "x/(1+t)"),
        ),
        _ => (
            LinearComb::new([(Rational::one(), 1, 0), (Rational::one(), 2, 1)]),
            ExactSolution::new(&x - &t, &Polynomial::one() + &t, "(x-t)/(1+t)"),
        ),
    };
    ProblemSpec {
        id: id.name().into(),
        independent_vars: vec![Var::T, Var::X],
        inverse_plan: InversePlan::single(Var::T, int(0)),
        remainder,
        nonlinearity: NonlinearExpr::u().times(NonlinearExpr::deriv(1, 0)),
        source: Polynomial::zero(),
        phi: x.clone(),
        conditions: vec![Condition::new(0, 0, Var::T, int(0), x)],
        default_grid: SampleGrid::tensor(
            &[
                uniform_axis(Var::X, rat(1, 2), rat(1, 2), 20),
                uniform_axis(Var::T, rat(1, 20), rat(1, 20), 20),
            ],
            "(x_i, t_j) = (i/2, j/20), i, j = 1..20",
        ),
        domain: vec![(Var::X, 0.5, 10.0), (Var::T, 0.05, 1.0)],
        exact: Some(exact),
        parameters: BTreeMap::new(),
        note: Some("domain is the hull of the sample grid".into()),
    }
}

/// Partial sum `-sum_{k=0..n} (-eps)^k` of the perturbation series for `u'(0)`.
pub fn perturbation_uprime0(n: usize, eps: &Rational) -> Rational {
    let ratio = -eps;
    let mut term = Rational::one();
    let mut sum = Rational::zero();
    for _ in 0..=n {
        sum += &term;
        term *= &ratio;
    }
    -sum
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstOrderCheck {
    pub eps: Rational,
    pub c: Rational,
    pub value: Rational,
    pub expected: Rational,
    pub passed: bool,
}

/// First-order ADMP slope at `t = 0` with `c = 1/(1+eps)`, compared with `-1/(1+eps)`.
/// Panics if `eps == -1`.
pub fn heat_transfer_first_order_check(eps: &Rational) -> Result<FirstOrderCheck> {
    let denom = Rational::one() + eps;
    assert!(!denom.is_zero(), "eps = -1 has no first-order check");
    let c = Rational::one() / &denom;
    let problem = catalog(ProblemId::HeatTransfer)?;
    let sol = admp_solve(&problem, 1)?;
    let slope = partial_sum(&sol, 1, Some(&c))?
        .diff(Var::T)
        .substitute_value(Var::T, &Rational::zero())
        .substitute_value(Var::Eps, eps);
    let value = slope.as_constant().ok_or_else(|| {
        Error::InvalidProblem("first-order slope still has free variables".into())
    })?;
    let expected = -(Rational::one() / denom);
    Ok(FirstOrderCheck { eps: eps.clone(), c, passed: value == expected, value, expected })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RatValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RatValue {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            RatValue::Int(n) => Ok(int(*n)),
            RatValue::Float(f) => parse_rational(&format!("{f:?}")),
            RatValue::Text(s) => parse_rational(s),
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            RatValue::Float(f) => Ok(*f),
            other => Ok(crate::ratpoly::rational_to_f64(&other.to_rational()?)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    label: String,
    axes: Vec<(String, RatValue, RatValue, usize)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactFile {
    numerator: String,
    denominator: String,
    description: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    id: String,
    independent_vars: Vec<String>,
    inverse_plan: Vec<(String, RatValue)>,
    #[serde(default)]
    remainder: Vec<(RatValue, u32, u32)>,
    nonlinearity: String,
    phi: String,
    #[serde(default = "zero_text")]
    f: String,
    #[serde(default)]
    conditions: Vec<(u32, u32, String, RatValue, String)>,
    grid: GridFile,
    domain: Vec<(String, RatValue, RatValue)>,
    exact: Option<ExactFile>,
    #[serde(default)]
    parameters: BTreeMap<String, RatValue>,
    note: Option<String>,
}

fn zero_text() -> String {
    "0".into()
}

impl ProblemFile {
    fn into_spec(self) -> Result<ProblemSpec> {
        let var = |s: &str| s.parse::<Var>();
        let independent_vars = self.independent_vars.iter().map(|s| var(s)).collect::<Result<Vec<_>>>()?;
        let steps = self
            .inverse_plan
            .iter()
            .map(|(v, lo)| Ok((var(v)?, lo.to_rational()?)))
            .collect::<Result<Vec<_>>>()?;
        let remainder = self
            .remainder
            .iter()
            .map(|(c, a, b)| Ok((c.to_rational()?, *a, *b)))
            .collect::<Result<Vec<_>>>()?;
        let conditions = self
            .conditions
            .iter()
            .map(|(a, b, v, at, value)| Ok(Condition::new(*a, *b, var(v)?, at.to_rational()?, value.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        let axes = self
            .grid
            .axes
            .iter()
            .map(|(v, start, step, count)| {
                Ok(uniform_axis(var(v)?, start.to_rational()?, step.to_rational()?, *count))
            })
            .collect::<Result<Vec<_>>>()?;
        if axes.iter().any(|a| a.count == 0) {
            return Err(Error::InvalidProblem("grid axis with zero points".into()));
        }
        let domain = self
            .domain
            .iter()
            .map(|(v, lo, hi)| Ok((var(v)?, lo.to_f64()?, hi.to_f64()?)))
            .collect::<Result<Vec<_>>>()?;
        let exact = match self.exact {
            Some(e) => {
                let description = e.description.unwrap_or_else(|| format!("({})/({})", e.numerator, e.denominator));
                Some(ExactSolution::new(e.numerator.parse()?, e.denominator.parse()?, description))
            }
            None => None,
        };
        let parameters = self
            .parameters
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.to_rational()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let spec = ProblemSpec {
            id: self.id,
            independent_vars,
            inverse_plan: InversePlan::new(steps)?,
            remainder: LinearComb::new(remainder),
            nonlinearity: self.nonlinearity.parse()?,
            source: self.f.parse()?,
            phi: self.phi.parse()?,
            conditions,
            default_grid: SampleGrid::tensor(&axes, self.grid.label),
            domain,
            exact,
            parameters,
            note: self.note,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Renders a problem in the TOML problem-file format.
pub fn to_toml(spec: &ProblemSpec) -> String {
    let q = |s: &str| format!("{s:?}");
    let r = |x: &Rational| q(&format_rational(x));
    let mut out = String::new();
    out.push_str(&format!("id = {}\n", q(&spec.id)));
    let vars: Vec<_> = spec.independent_vars.iter().map(|v| q(v.name())).collect();
    out.push_str(&format!("independent_vars = [{}]\n", vars.join(", ")));
    let steps: Vec<_> =
        spec.inverse_plan.steps().iter().map(|(v, lo)| format!("[{}, {}]", q(v.name()), r(lo))).collect();
    out.push_str(&format!("inverse_plan = [{}]\n", steps.join(", ")));
    let rem: Vec<_> =
        spec.remainder.terms().iter().map(|(c, a, b)| format!("[{}, {a}, {b}]", r(c))).collect();
    out.push_str(&format!("remainder = [{}]\n", rem.join(", ")));
    out.push_str(&format!("nonlinearity = {}\n", q(&spec.nonlinearity.to_string())));
    out.push_str(&format!("phi = {}\n", q(&spec.phi.to_string())));
    out.push_str(&format!("f = {}\n", q(&spec.source.to_string())));
    let conds: Vec<_> = spec
        .conditions
        .iter()
        .map(|c| format!("[{}, {}, {}, {}, {}]", c.x, c.t, q(c.var.name()), r(&c.at), q(&c.value.to_string())))
        .collect();
    out.push_str(&format!("conditions = [{}]\n", conds.join(", ")));
    let dom: Vec<_> =
        spec.domain.iter().map(|(v, lo, hi)| format!("[{}, {lo:?}, {hi:?}]", q(v.name()))).collect();
    out.push_str(&format!("domain = [{}]\n", dom.join(", ")));
    if let Some(note) = &spec.note {
        out.push_str(&format!("note = {}\n", q(note)));
    }
    out.push_str("\n[grid]\n");
    out.push_str(&format!("label = {}\n", q(spec.default_grid.label())));
    let axes: Vec<_> = spec
        .default_grid
        .axes()
        .iter()
        .map(|a| format!("[{}, {}, {}, {}]", q(a.var.name()), r(&a.start), r(&a.step), a.count))
        .collect();
    out.push_str(&format!("axes = [{}]\n", axes.join(", ")));
    if let Some(e) = &spec.exact {
        out.push_str("\n[exact]\n");
        out.push_str(&format!("numerator = {}\n", q(&e.numerator.to_string())));
        out.push_str(&format!("denominator = {}\n", q(&e.base.to_string())));
        out.push_str(&format!("description = {}\n", q(&e.description)));
    }
    if !spec.parameters.is_empty() {
        out.push_str("\n[parameters]\n");
        for (k, v) in &spec.parameters {
            out.push_str(&format!("{k} = {}\n", r(v)));
        }
    }
    out
}
