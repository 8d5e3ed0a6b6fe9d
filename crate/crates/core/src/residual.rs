//! Residual measures and the optimal-`c` search.
//!
//! Derivative images are formed exactly; numbers enter only when a point and a
//! value of `c` are bound. Sums over grid points always run in grid order, so
//! results are bit-reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::minimize::{brent, golden_section};
use crate::problems::{ExactSolution, ProblemSpec};
use crate::ratpoly::{format_rational, rational_to_f64, FloatPoly, Polynomial, Rational, Var};
use crate::series::NonlinearExpr;

/// Reciprocal powers of values smaller than this in magnitude are rejected.
pub const DEFAULT_DIVISION_FLOOR: f64 = 1e-12;
pub const DEFAULT_BRACKET: (f64, f64) = (0.1, 2.0);
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEEDS: usize = 64;
pub const DEFAULT_MER_SAMPLES: usize = 1001;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAxis {
    pub var: Var,
    pub start: Rational,
    pub step: Rational,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<Rational> {
        (0..self.count)
            .map(|i| &self.start + &self.step * Rational::from_integer((i as i64).into()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGrid {
    points: Vec<BTreeMap<Var, Rational>>,
    label: String,
    axes: Vec<GridAxis>,
}

impl SampleGrid {
    /// Tensor product of uniform axes; the first axis varies slowest.
    pub fn tensor(axes: &[GridAxis], label: impl Into<String>) -> Self {
        let mut points = vec![BTreeMap::new()];
        for axis in axes {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(axis.var, v.clone());
                        q
                    })
                })
                .collect();
        }
        if axes.is_empty() {
            points.clear();
        }
        SampleGrid { points, label: label.into(), axes: axes.to_vec() }
    }

    pub fn from_points(points: Vec<BTreeMap<Var, Rational>>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidProblem("sample grid is empty".into()));
        }
        Ok(SampleGrid { points, label: label.into(), axes: Vec::new() })
    }

    pub fn points(&self) -> &[BTreeMap<Var, Rational>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    /// Adds a fixed binding (such as `eps`) to every point.
    pub fn with_binding(&self, var: Var, value: &Rational) -> SampleGrid {
        let mut out = self.clone();
        for p in out.points.iter_mut() {
            p.insert(var, value.clone());
        }
        out.label = format!("{}; {var} = {}", self.label, format_rational(value));
        out
    }
}

/// `N` prepared for repeated numeric evaluation.
#[derive(Debug, Clone)]
enum NumExpr {
    Deriv(usize),
    Const(FloatPoly),
    Add(Vec<NumExpr>),
    Mul(Vec<NumExpr>),
    Pow(Box<NumExpr>, i32),
}

impl NumExpr {
    fn compile(n: &NonlinearExpr, orders: &[(u32, u32)]) -> NumExpr {
        match n {
            NonlinearExpr::UnknownDeriv { x, t } => {
                NumExpr::Deriv(orders.iter().position(|o| *o == (*x, *t)).expect("order collected"))
            }
            NonlinearExpr::Const(p) => NumExpr::Const(p.to_float()),
            NonlinearExpr::Add(v) => NumExpr::Add(v.iter().map(|e| NumExpr::compile(e, orders)).collect()),
            NonlinearExpr::Mul(v) => NumExpr::Mul(v.iter().map(|e| NumExpr::compile(e, orders)).collect()),
            NonlinearExpr::IntPow(b, k) => NumExpr::Pow(Box::new(NumExpr::compile(b, orders)), *k),
        }
    }

    fn eval(&self, derivs: &[f64], values: &[f64; 4], floor: f64) -> Result<f64> {
        Ok(match self {
            NumExpr::Deriv(i) => derivs[*i],
            NumExpr::Const(p) => p.eval_values(values),
            NumExpr::Add(v) => {
                let mut s = 0.0;
                for e in v {
                    s += e.eval(derivs, values, floor)?;
                }
                s
            }
            NumExpr::Mul(v) => {
                let mut s = 1.0;
                for e in v {
                    s *= e.eval(derivs, values, floor)?;
                }
                s
            }
            NumExpr::Pow(b, k) => {
                let base = b.eval(derivs, values, floor)?;
                if *k < 0 && base.abs() < floor {
                    return Err(Error::DivisionNearZero { value: base, floor });
                }
                base.powi(*k)
            }
        })
    }
}

fn constant_vars(n: &NonlinearExpr, out: &mut Vec<Var>) {
    match n {
        NonlinearExpr::UnknownDeriv { .. } => {}
        NonlinearExpr::Const(p) => out.extend(p.variables()),
        NonlinearExpr::Add(v) | NonlinearExpr::Mul(v) => v.iter().for_each(|e| constant_vars(e, out)),
        NonlinearExpr::IntPow(b, _) => constant_vars(b, out),
    }
}

/// Residual `L[psi] + R[psi] + N[psi] - f` with the derivative images formed exactly.
#[derive(Debug, Clone)]
pub struct ResidualForm {
    linear: FloatPoly,
    images: Vec<FloatPoly>,
    expr: NumExpr,
    vars: Vec<Var>,
    floor: f64,
}

impl ResidualForm {
    pub fn new(problem: &ProblemSpec, psi: &Polynomial) -> Self {
        let linear = &problem.full_linear().apply(psi) - &problem.source;
        let orders = problem.nonlinearity.derivative_orders();
        let images: Vec<Polynomial> =
            orders.iter().map(|(a, b)| psi.diff_n(Var::X, *a).diff_n(Var::T, *b)).collect();
        let mut vars = psi.variables();
        vars.extend(problem.source.variables());
        constant_vars(&problem.nonlinearity, &mut vars);
        vars.sort();
        vars.dedup();
        ResidualForm {
            linear: linear.to_float(),
            images: images.iter().map(Polynomial::to_float).collect(),
            expr: NumExpr::compile(&problem.nonlinearity, &orders),
            vars,
            floor: DEFAULT_DIVISION_FLOOR,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Fixes one variable, typically `c`.
    pub fn bind(&self, var: Var, value: f64) -> ResidualForm {
        let bind_expr = |e: &NumExpr| bind_num(e, var, value);
        ResidualForm {
            linear: self.linear.bind(var, value),
            images: self.images.iter().map(|p| p.bind(var, value)).collect(),
            expr: bind_expr(&self.expr),
            vars: self.vars.iter().copied().filter(|v| *v != var).collect(),
            floor: self.floor,
        }
    }

    pub fn check_bound(&self, bound: &[Var]) -> Result<()> {
        match self.vars.iter().find(|v| !bound.contains(v)) {
            Some(v) => Err(Error::UnboundVariable(*v)),
            None => Ok(()),
        }
    }

    /// Evaluation with values indexed by [`Var::index`]; unbound slots read as 0.
    pub fn eval_values(&self, values: &[f64; 4]) -> Result<f64> {
        let derivs: Vec<f64> = self.images.iter().map(|p| p.eval_values(values)).collect();
        Ok(self.linear.eval_values(values) + self.expr.eval(&derivs, values, self.floor)?)
    }

    pub fn eval(&self, point: &BTreeMap<Var, f64>) -> Result<f64> {
        let bound: Vec<Var> = point.keys().copied().collect();
        self.check_bound(&bound)?;
        self.eval_values(&values_of(point))
    }
}

fn bind_num(e: &NumExpr, var: Var, value: f64) -> NumExpr {
    match e {
        NumExpr::Deriv(i) => NumExpr::Deriv(*i),
        NumExpr::Const(p) => NumExpr::Const(p.bind(var, value)),
        NumExpr::Add(v) => NumExpr::Add(v.iter().map(|e| bind_num(e, var, value)).collect()),
        NumExpr::Mul(v) => NumExpr::Mul(v.iter().map(|e| bind_num(e, var, value)).collect()),
        NumExpr::Pow(b, k) => NumExpr::Pow(Box::new(bind_num(b, var, value)), *k),
    }
}

fn values_of(point: &BTreeMap<Var, f64>) -> [f64; 4] {
    Var::ALL.map(|v| point.get(&v).copied().unwrap_or(0.0))
}

/// `R_n` at one point for a given `c`.
pub fn error_remainder(
    problem: &ProblemSpec,
    psi: &Polynomial,
    point: &BTreeMap<Var, f64>,
    c_value: f64,
) -> Result<f64> {
    let mut point = point.clone();
    point.insert(Var::C, c_value);
    ResidualForm::new(problem, psi).eval(&point)
}

/// Residual of a closed-form solution, from exact derivative images.
pub fn exact_solution_residual(
    problem: &ProblemSpec,
    exact: &ExactSolution,
    point: &BTreeMap<Var, f64>,
) -> Result<f64> {
    let mut linear = 0.0;
    for (coeff, a, b) in problem.full_linear().terms() {
        linear += rational_to_f64(coeff) * exact.derivative(*a, *b).eval_f64(point)?;
    }
    let orders = problem.nonlinearity.derivative_orders();
    let derivs = orders
        .iter()
        .map(|(a, b)| exact.derivative(*a, *b).eval_f64(point))
        .collect::<Result<Vec<_>>>()?;
    let expr = NumExpr::compile(&problem.nonlinearity, &orders);
    let values = values_of(point);
    let n = expr.eval(&derivs, &values, DEFAULT_DIVISION_FLOOR)?;
    Ok(linear + n - problem.source.eval_f64(point)?)
}

#[derive(Debug, Clone)]
struct GridPoint {
    values: [f64; 4],
    linear: Vec<f64>,
    images: Vec<Vec<f64>>,
}

fn horner_c(coeffs: &[f64], c: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * c + a)
}

/// The residual on a fixed grid, reduced to a univariate polynomial in `c`
/// per point (exact substitution of the rational grid point, then conversion).
#[derive(Debug, Clone)]
pub struct GridResidual {
    points: Vec<GridPoint>,
    expr: NumExpr,
    floor: f64,
}

impl GridResidual {
    pub fn new(problem: &ProblemSpec, psi: &Polynomial, grid: &SampleGrid) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidProblem("sample grid is empty".into()));
        }
        let linear = &problem.full_linear().apply(psi) - &problem.source;
        let orders = problem.nonlinearity.derivative_orders();
        let images: Vec<Polynomial> =
            orders.iter().map(|(a, b)| psi.diff_n(Var::X, *a).diff_n(Var::T, *b)).collect();
        let mut const_vars = Vec::new();
        constant_vars(&problem.nonlinearity, &mut const_vars);

        let in_c = |p: &Polynomial, point: &BTreeMap<Var, Rational>| -> Result<Vec<f64>> {
            let mut q = p.clone();
            for (v, value) in point {
                q = q.substitute_value(*v, value);
            }
            if let Some(v) = q.variables().into_iter().find(|v| *v != Var::C) {
                return Err(Error::UnboundVariable(v));
            }
            Ok(q.coefficients_in(Var::C).iter().map(|k| rational_to_f64(&k.as_constant().expect("only c remains"))).collect())
        };

        let mut points = Vec::with_capacity(grid.len());
        for point in grid.points() {
            if let Some(v) = const_vars.iter().find(|v| **v != Var::C && !point.contains_key(v)) {
                return Err(Error::UnboundVariable(*v));
            }
            let mut values = [0.0; 4];
            for (v, value) in point {
                values[v.index()] = rational_to_f64(value);
            }
            points.push(GridPoint {
                values,
                linear: in_c(&linear, point)?,
                images: images.iter().map(|p| in_c(p, point)).collect::<Result<_>>()?,
            });
        }
        Ok(GridResidual { points, expr: NumExpr::compile(&problem.nonlinearity, &orders), floor: DEFAULT_DIVISION_FLOOR })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Residual at every grid point, in grid order.
    pub fn residuals(&self, c: f64) -> Result<Vec<f64>> {
        let mut derivs = Vec::new();
        self.points
            .iter()
            .map(|p| {
                derivs.clear();
                derivs.extend(p.images.iter().map(|k| horner_c(k, c)));
                let mut values = p.values;
                values[Var::C.index()] = c;
                Ok(horner_c(&p.linear, c) + self.expr.eval(&derivs, &values, self.floor)?)
            })
            .collect()
    }

    /// `E(c) = (1/M) sum_k r_k^2`.
    pub fn mean_square(&self, c: f64) -> Result<f64> {
        let r = self.residuals(c)?;
        Ok(r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64)
    }
}

pub fn averaged_residual(problem: &ProblemSpec, psi: &Polynomial, grid: &SampleGrid, c_value: f64) -> Result<f64> {
    GridResidual::new(problem, psi, grid)?.mean_square(c_value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub c_star: f64,
    pub e_at_c_star: f64,
    /// Central-difference `E'(c*)`, reported as a diagnostic only.
    pub e_prime_at_c_star: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// Every refined local minimum `(c, E(c))`, in increasing `c`.
    pub local_minima: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub seeds: usize,
    pub max_iter: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { seeds: DEFAULT_SEEDS, max_iter: 500 }
    }
}

/// Minimizes `E(c)` over the bracket; see [`minimize_scalar`].
pub fn optimal_c(
    problem: &ProblemSpec,
    psi: &Polynomial,
    grid: &SampleGrid,
    bracket: (f64, f64),
    tol: f64,
) -> Result<OptimizeResult> {
    let e = GridResidual::new(problem, psi, grid)?;
    minimize_scalar(|c| e.mean_square(c), bracket, tol, OptimizeOptions::default())
}

/// Coarse scan over `options.seeds` equally spaced points. Each interior local
/// minimum of the scan is rescanned on its two neighbouring cells with the same
/// number of points, and Brent refines every local minimum of the finer scan.
/// The best refined point wins.
pub fn minimize_scalar(
    mut f: impl FnMut(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol: f64,
    options: OptimizeOptions,
) -> Result<OptimizeResult> {
    let (low, high) = bracket;
    if !(low < high) || !(tol > 0.0) || options.seeds < 3 {
        return Err(Error::InvalidBracket { low, high, tol });
    }
    let n = options.seeds;
    let (seeds, values) = scan(&mut f, low, high, n)?;
    let mut evaluations = n;

    let interior_min = values[1..n - 1].iter().cloned().fold(f64::INFINITY, f64::min);
    for end in [0, n - 1] {
        if values[end] < interior_min {
            return Err(Error::BracketError { low, high, end: seeds[end] });
        }
    }

    let mut local_minima: Vec<(f64, f64)> = Vec::new();
    for i in scan_minima(&values) {
        let (fine, fine_values) = scan(&mut f, seeds[i - 1], seeds[i + 1], n)?;
        evaluations += n;
        for j in scan_minima(&fine_values) {
            let m = brent(&mut f, fine[j - 1], fine[j + 1], tol, options.max_iter)?;
            evaluations += m.evaluations;
            let found = if m.fx <= fine_values[j] { (m.x, m.fx) } else { (fine[j], fine_values[j]) };
            if !local_minima.iter().any(|&(x, _)| (x - found.0).abs() <= 4.0 * tol) {
                local_minima.push(found);
            }
        }
    }
    local_minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (c_star, e_star) = local_minima
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("an interior seed is minimal when no end wins");
    let step = 1e-6 * c_star.abs().max(1.0);
    let e_prime = (f(c_star + step)? - f(c_star - step)?) / (2.0 * step);
    evaluations += 2;
    Ok(OptimizeResult { c_star, e_at_c_star: e_star, e_prime_at_c_star: e_prime, bracket, evaluations, local_minima })
}

fn scan(f: &mut impl FnMut(f64) -> Result<f64>, low: f64, high: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = (high - low) / (n - 1) as f64;
    let points: Vec<f64> = (0..n).map(|i| if i == n - 1 { high } else { low + h * i as f64 }).collect();
    let values = points.iter().map(|&c| f(c)).collect::<Result<Vec<_>>>()?;
    Ok((points, values))
}

fn scan_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len() - 1).filter(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxResidual {
    pub value: f64,
    pub location: Vec<(Var, f64)>,
}

/// `max |R_n|` over a box: uniform sampling with `samples` points per axis,
/// then golden-section refinement along each axis around the best sample.
pub fn max_error_remainder(
    problem: &ProblemSpec,
    psi: &Polynomial,
    c_value: f64,
    domain: &[(Var, f64, f64)],
    samples: usize,
) -> Result<f64> {
    Ok(max_abs_residual(&ResidualForm::new(problem, psi).bind(Var::C, c_value), domain, samples, &[])?.value)
}

/// Same as [`max_error_remainder`] on an already prepared form; `fixed` binds
/// any remaining parameters such as `eps`.
pub fn max_abs_residual(
    form: &ResidualForm,
    domain: &[(Var, f64, f64)],
    samples: usize,
    fixed: &[(Var, f64)],
) -> Result<MaxResidual> {
    if samples < 2 || domain.is_empty() {
        return Err(Error::InvalidProblem("need at least 2 samples and one domain axis".into()));
    }
    let mut bound: Vec<Var> = domain.iter().map(|d| d.0).collect();
    bound.extend(fixed.iter().map(|f| f.0));
    form.check_bound(&bound)?;

    let mut values = [0.0; 4];
    for (v, x) in fixed {
        values[v.index()] = *x;
    }
    let coord = |axis: usize, i: usize| {
        let (_, lo, hi) = domain[axis];
        if i == samples - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        }
    };

    let mut index = vec![0usize; domain.len()];
    let mut best = (-1.0f64, index.clone());
    loop {
        for (axis, &i) in index.iter().enumerate() {
            values[domain[axis].0.index()] = coord(axis, i);
        }
        let r = form.eval_values(&values)?.abs();
        if r > best.0 {
            best = (r, index.clone());
        }
        // odometer over axes, last axis fastest
        let mut axis = domain.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < samples {
                break;
            }
            index[axis] = 0;
        }
        if index.iter().all(|&i| i == 0) {
            break;
        }
    }

    let mut location: Vec<f64> = best.1.iter().enumerate().map(|(a, &i)| coord(a, i)).collect();
    let mut value = best.0;
    for (axis, (var, lo, hi)) in domain.iter().enumerate() {
        let h = (hi - lo) / (samples - 1) as f64;
        let a = (location[axis] - h).max(*lo);
        let b = (location[axis] + h).min(*hi);
        let mut probe = values;
        for (k, (v, _, _)) in domain.iter().enumerate() {
            probe[v.index()] = location[k];
        }
        let m = golden_section(
            |x| {
                let mut p = probe;
                p[var.index()] = x;
                Ok::<f64, Error>(-form.eval_values(&p)?.abs())
            },
            a,
            b,
            h * 1e-9,
        )?;
        if -m.fx > value {
            value = -m.fx;
            location[axis] = m.x;
        }
    }
    Ok(MaxResidual { value, location: domain.iter().map(|d| d.0).zip(location).collect() })
}

/// `E_n = psi_n - u_exact` at a point.
pub fn error_vs_exact(
    psi: &Polynomial,
    exact: &ExactSolution,
    point: &BTreeMap<Var, f64>,
    c_value: f64,
) -> Result<f64> {
    let mut with_c = point.clone();
    with_c.insert(Var::C, c_value);
    Ok(psi.eval_f64(&with_c)? - exact.eval_f64(point)?)
}

/// Exact-arithmetic version of [`error_vs_exact`].
pub fn error_vs_exact_rational(
    psi: &Polynomial,
    exact: &ExactSolution,
    point: &BTreeMap<Var, Rational>,
    c_value: &Rational,
) -> Result<Rational> {
    let mut with_c = point.clone();
    with_c.insert(Var::C, c_value.clone());
    Ok(psi.eval_exact(&with_c)? - exact.eval_exact(point)?)
}

/// Exact `E(c)` for problems whose residual is polynomial (no reciprocal powers).
pub fn averaged_residual_exact(
    problem: &ProblemSpec,
    psi: &Polynomial,
    grid: &SampleGrid,
    c_value: &Rational,
) -> Result<Rational> {
    let psi = psi.substitute_value(Var::C, c_value);
    let residual = &(&problem.full_linear().apply(&psi) + &problem.nonlinearity.apply(&psi)?) - &problem.source;
    let mut sum = Rational::zero();
    for point in grid.points() {
        let r = residual.eval_exact(point)?;
        sum += &r * &r;
    }
    Ok(sum / Rational::from_integer((grid.len() as i64).into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub c_star: f64,
    pub e_at_c_star: f64,
    pub mer_admp: f64,
    pub mer_adm: f64,
}

pub const TABLE1_HEADER: &str = "n,c_star,E_at_c_star,MER_admp,MER_adm";

impl Table1Row {
    pub fn csv(&self) -> String {
        format!("{},{:.6},{:.6e},{:.6e},{:.6e}", self.n, self.c_star, self.e_at_c_star, self.mer_admp, self.mer_adm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Settings {
    pub bracket: (f64, f64),
    pub tol: f64,
    pub samples: usize,
}

impl Default for Table1Settings {
    fn default() -> Self {
        Table1Settings { bracket: DEFAULT_BRACKET, tol: DEFAULT_TOL, samples: DEFAULT_MER_SAMPLES }
    }
}

/// For each `n` in `1..=order_max`: the optimal `c` on `grid`, the averaged
/// residual there, and the maximal error remainder at that `c` and at `c = 1`.
pub fn table1(
    problem: &ProblemSpec,
    psis: &[Polynomial],
    grid: &SampleGrid,
    settings: &Table1Settings,
) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for (n, psi) in psis.iter().enumerate().skip(1) {
        let opt = optimal_c(problem, psi, grid, settings.bracket, settings.tol)?;
        let form = ResidualForm::new(problem, psi);
        let mer = |c: f64| -> Result<f64> {
            Ok(max_abs_residual(&form.bind(Var::C, c), &problem.domain, settings.samples, &[])?.value)
        };
        rows.push(Table1Row {
            n,
            c_star: opt.c_star,
            e_at_c_star: opt.e_at_c_star,
            mer_admp: mer(opt.c_star)?,
            mer_adm: mer(1.0)?,
        });
    }
    Ok(rows)
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::new();
    writeln!(out, "{TABLE1_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{}", r.csv()).unwrap();
    }
    out
}
