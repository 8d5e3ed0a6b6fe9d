//! Command-line driver. `run` parses arguments, executes one command and
//! returns the process exit code: 0 on success, 1 on usage or solver errors,
//! 2 when `validate` finds a failing check.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calculus::verify_conditions;
use crate::error::{Error, Result};
use crate::problems::{catalog, ProblemId, ProblemSpec};
use crate::ratpoly::{format_rational, parse_rational, rational_to_f64, Polynomial, Rational, Var};
use crate::residual::{
    error_vs_exact, exact_solution_residual, optimal_c, table1, table1_csv, GridAxis, GridResidual,
    OptimizeResult, SampleGrid, Table1Settings, DEFAULT_BRACKET, DEFAULT_DIVISION_FLOOR, DEFAULT_MER_SAMPLES,
    DEFAULT_SEEDS, DEFAULT_TOL, TABLE1_HEADER,
};
use crate::scheme::{adm_solve, admp_solve, partial_sum, partial_sums, Method};

/// Exact-solution residuals above this count as a validation failure.
const EXACT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "admp", version, about = "Adomian decomposition with a convergence-control parameter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the series terms.
    Solve(SolveArgs),
    /// Find the `c` minimizing the averaged squared residual on a grid.
    Optimize(OptimizeArgs),
    /// Optimal `c` and maximal error remainders for n = 1..order-max.
    Table1(Table1Args),
    /// Residual of `psi_n` at each grid point.
    ResidualField(FieldArgs),
    /// `psi_n` minus the exact solution at each grid point.
    ErrorField(FieldArgs),
    /// Check conditions, inverse plans and exact solutions of problem definitions.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    StructuredText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Adm,
    Admp,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct Search {
    /// Sample grid, e.g. `x=1/2:1/2:20,t=1/20:1/20:20` (start:step:count per axis, first axis slowest).
    #[arg(long)]
    grid: Option<String>,
    /// Search interval for `c`, as `low,high`.
    #[arg(long, value_parser = parse_bracket)]
    bracket: Option<(f64, f64)>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Catalog id (heat_transfer, nems_vdw, burgers, rlw) or path to a problem file.
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// `symbolic`, `optimal` or a number.
    #[arg(long, default_value = "symbolic")]
    c: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Admp)]
    method: MethodArg,
    #[arg(long)]
    eps: Option<String>,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 10)]
    order: usize,
    #[arg(long)]
    eps: Option<String>,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct Table1Args {
    #[arg(long, default_value = "nems_vdw")]
    problem: String,
    #[arg(long, default_value_t = 10)]
    order_max: usize,
    #[arg(long)]
    eps: Option<String>,
    /// Uniform samples per axis for the maximal error remainder.
    #[arg(long, default_value_t = DEFAULT_MER_SAMPLES)]
    samples: usize,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// `optimal` or a number.
    #[arg(long, default_value = "optimal")]
    c: String,
    #[arg(long)]
    eps: Option<String>,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Problem to check; all catalog problems when omitted.
    #[arg(long)]
    problem: Vec<String>,
    /// Highest partial sum whose conditions are checked exactly.
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

enum CChoice {
    Symbolic,
    Optimal,
    Value(Rational),
}

/// Distinguishes usage mistakes from failures of the computation itself.
enum Failure {
    Usage(String),
    Solver(Error),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(flag: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{flag}: {message}"))
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let (result, output) = match &cli.command {
        Command::Solve(a) => (solve(a), &a.output),
        Command::Optimize(a) => (optimize(a), &a.output),
        Command::Table1(a) => (table(a), &a.output),
        Command::ResidualField(a) => (field(a, false), &a.output),
        Command::ErrorField(a) => (field(a, true), &a.output),
        Command::Validate(a) => (validate(a), &a.output),
    };
    let (text, code) = match result {
        Ok(text) => (text, 0),
        Err(Failure::Validation(text)) => (text, 2),
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            return 1;
        }
        Err(Failure::Solver(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    match &output.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(stderr, "error: --out {}: {e}", path.display());
                return 1;
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    code
}

fn parse_bracket(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `low,high`")?;
    let low: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let high: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(low < high) {
        return Err("low must be below high".into());
    }
    Ok((low, high))
}

fn parse_c(s: &str) -> CliResult<CChoice> {
    match s {
        "symbolic" => Ok(CChoice::Symbolic),
        "optimal" => Ok(CChoice::Optimal),
        v => parse_rational(v).map(CChoice::Value).map_err(|e| usage("--c", e)),
    }
}

/// Parses `var=start:step:count` axes separated by commas.
fn parse_grid(s: &str) -> CliResult<SampleGrid> {
    let mut axes = Vec::new();
    for part in s.split(',') {
        let bad = |m: &str| usage("--grid", format!("`{part}`: {m}"));
        let (var, spec) = part.split_once('=').ok_or_else(|| bad("expected var=start:step:count"))?;
        let var: Var = var.trim().parse().map_err(|_| bad("unknown variable"))?;
        let fields: Vec<&str> = spec.split(':').collect();
        if fields.len() != 3 {
            return Err(bad("expected start:step:count"));
        }
        let start = parse_rational(fields[0].trim()).map_err(|e| bad(&e.to_string()))?;
        let step = parse_rational(fields[1].trim()).map_err(|e| bad(&e.to_string()))?;
        let count: usize = fields[2].trim().parse().map_err(|_| bad("count must be a positive integer"))?;
        if count == 0 {
            return Err(bad("count must be a positive integer"));
        }
        axes.push(GridAxis { var, start, step, count });
    }
    Ok(SampleGrid::tensor(&axes, s))
}

fn load_problem(s: &str) -> CliResult<ProblemSpec> {
    if let Ok(id) = s.parse::<ProblemId>() {
        return Ok(catalog(id)?);
    }
    if Path::new(s).exists() {
        let spec = ProblemSpec::load(s)?;
        spec.validate()?;
        return Ok(spec);
    }
    Err(usage("--problem", format!("`{s}` is neither a catalog id nor a readable file")))
}

/// Loads the problem and fixes `eps` when given.
fn prepare(problem: &str, eps: &Option<String>) -> CliResult<ProblemSpec> {
    let spec = load_problem(problem)?;
    match eps {
        Some(e) => {
            let value = parse_rational(e).map_err(|err| usage("--eps", err))?;
            Ok(spec.bind(Var::Eps, &value))
        }
        None => Ok(spec),
    }
}

fn require_numeric(spec: &ProblemSpec, psi: &Polynomial) -> CliResult<()> {
    if psi.contains(Var::Eps) || spec.nonlinearity.contains(Var::Eps) {
        return Err(usage("--eps", format!("problem `{}` has a free eps; pass a value", spec.id)));
    }
    Ok(())
}

fn grid_for(spec: &ProblemSpec, search: &Search) -> CliResult<SampleGrid> {
    let grid = match &search.grid {
        Some(g) => parse_grid(g)?,
        None => spec.default_grid.clone(),
    };
    for point in grid.points() {
        for v in &spec.independent_vars {
            if !point.contains_key(v) {
                return Err(usage("--grid", format!("does not bind `{v}`")));
            }
        }
    }
    Ok(grid)
}

fn search_settings(search: &Search) -> CliResult<((f64, f64), f64)> {
    let tol = search.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(usage("--tol", "must be positive"));
    }
    Ok((search.bracket.unwrap_or(DEFAULT_BRACKET), tol))
}

struct Header(String);

impl Header {
    fn new(command: &str, spec: &ProblemSpec) -> Self {
        let mut h = Header(String::new());
        h.add("admp", env!("CARGO_PKG_VERSION"));
        h.add("command", command);
        h.add("problem", &spec.id);
        for (k, v) in &spec.parameters {
            h.add(k, format_rational(v));
        }
        h
    }

    fn add(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.0, "# {key}: {value}").unwrap();
    }

    fn search(&mut self, grid: &SampleGrid, bracket: (f64, f64), tol: f64) {
        self.add("grid", format!("{} ({} points)", grid.label(), grid.len()));
        self.add("bracket", format!("{},{}", bracket.0, bracket.1));
        self.add("tol", format!("{tol:e}"));
        self.add("seeds", DEFAULT_SEEDS);
        self.add("division_floor", format!("{DEFAULT_DIVISION_FLOOR:e}"));
    }
}

fn optimize_psi(
    spec: &ProblemSpec,
    psi: &Polynomial,
    search: &Search,
    header: &mut Header,
) -> CliResult<OptimizeResult> {
    require_numeric(spec, psi)?;
    let grid = grid_for(spec, search)?;
    let (bracket, tol) = search_settings(search)?;
    header.search(&grid, bracket, tol);
    Ok(optimal_c(spec, psi, &grid, bracket, tol)?)
}

/// `x` rounded to ten decimals, as an exact rational.
fn float_to_rational(x: f64) -> Rational {
    parse_rational(&format!("{x:.10}")).expect("finite decimal")
}

fn solve(a: &SolveArgs) -> CliResult<String> {
    let spec = prepare(&a.problem, &a.eps)?;
    let mut sol = match a.method {
        MethodArg::Adm => adm_solve(&spec, a.order)?,
        MethodArg::Admp => admp_solve(&spec, a.order)?,
    };
    let mut header = Header::new("solve", &spec);
    header.add("order", a.order);
    header.add("method", sol.method);
    let c = match (parse_c(&a.c)?, sol.method) {
        (CChoice::Symbolic, _) | (_, Method::Adm) => None,
        (CChoice::Value(v), _) => Some(v),
        (CChoice::Optimal, _) => {
            let psi = partial_sum(&sol, a.order, None)?;
            let opt = optimize_psi(&spec, &psi, &a.search, &mut header)?;
            Some(float_to_rational(opt.c_star))
        }
    };
    match &c {
        Some(v) => {
            header.add("c", format_rational(v));
            sol.terms = sol.terms.iter().map(|t| t.substitute_value(Var::C, v)).collect();
        }
        None => header.add("c", if sol.method == Method::Adm { "1 (ADM)" } else { "symbolic" }),
    }
    let mut out = header.0;
    match a.output.format.unwrap_or(Format::StructuredText) {
        Format::StructuredText => write!(out, "{sol}").unwrap(),
        Format::Csv => {
            writeln!(out, "k,term").unwrap();
            for (k, t) in sol.terms.iter().enumerate() {
                writeln!(out, "{k},{t}").unwrap();
            }
        }
    }
    Ok(out)
}

fn optimize(a: &OptimizeArgs) -> CliResult<String> {
    let spec = prepare(&a.problem, &a.eps)?;
    let sol = admp_solve(&spec, a.order)?;
    let psi = partial_sum(&sol, a.order, None)?;
    let mut header = Header::new("optimize", &spec);
    header.add("order", a.order);
    let r = optimize_psi(&spec, &psi, &a.search, &mut header)?;
    let mut out = header.0;
    match a.output.format.unwrap_or(Format::StructuredText) {
        Format::StructuredText => {
            writeln!(out, "c_star: {:.10}", r.c_star).unwrap();
            writeln!(out, "E_at_c_star: {:.6e}", r.e_at_c_star).unwrap();
            writeln!(out, "E_prime_at_c_star: {:.3e}", r.e_prime_at_c_star).unwrap();
            writeln!(out, "evaluations: {}", r.evaluations).unwrap();
            for (c, e) in &r.local_minima {
                writeln!(out, "local_minimum: {c:.10} {e:.6e}").unwrap();
            }
        }
        Format::Csv => {
            writeln!(out, "n,c_star,E_at_c_star,E_prime_at_c_star,evaluations").unwrap();
            writeln!(
                out,
                "{},{:.10},{:.6e},{:.3e},{}",
                a.order, r.c_star, r.e_at_c_star, r.e_prime_at_c_star, r.evaluations
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn table(a: &Table1Args) -> CliResult<String> {
    let spec = prepare(&a.problem, &a.eps)?;
    if a.order_max == 0 {
        return Err(usage("--order-max", "must be at least 1"));
    }
    if a.samples < 2 {
        return Err(usage("--samples", "must be at least 2"));
    }
    let sol = admp_solve(&spec, a.order_max)?;
    let psis = partial_sums(&sol);
    require_numeric(&spec, &psis[a.order_max])?;
    let grid = grid_for(&spec, &a.search)?;
    let (bracket, tol) = search_settings(&a.search)?;
    let mut header = Header::new("table1", &spec);
    header.add("order_max", a.order_max);
    header.search(&grid, bracket, tol);
    let domain: Vec<String> = spec.domain.iter().map(|(v, lo, hi)| format!("{v} in [{lo}, {hi}]")).collect();
    header.add("mer_domain", domain.join(", "));
    header.add("mer_samples", format!("{} per axis, then golden-section refinement", a.samples));
    let rows = table1(&spec, &psis, &grid, &Table1Settings { bracket, tol, samples: a.samples })?;
    let mut out = header.0;
    match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => out.push_str(&table1_csv(&rows)),
        Format::StructuredText => {
            let keys: Vec<&str> = TABLE1_HEADER.split(',').collect();
            for r in &rows {
                let values: Vec<String> = r.csv().split(',').map(String::from).collect();
                let pairs: Vec<String> = keys.iter().zip(&values).map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "row: {}", pairs.join(" ")).unwrap();
            }
        }
    }
    Ok(out)
}

fn field(a: &FieldArgs, error: bool) -> CliResult<String> {
    let command = if error { "error-field" } else { "residual-field" };
    let spec = prepare(&a.problem, &a.eps)?;
    let exact = match (&spec.exact, error) {
        (None, true) => return Err(usage("--problem", format!("`{}` has no exact solution", spec.id))),
        (e, _) => e.clone(),
    };
    let sol = admp_solve(&spec, a.order)?;
    let psi = partial_sum(&sol, a.order, None)?;
    let mut header = Header::new(command, &spec);
    header.add("order", a.order);
    let c = match parse_c(&a.c)? {
        CChoice::Symbolic => return Err(usage("--c", "a field needs `optimal` or a number")),
        CChoice::Value(v) => {
            require_numeric(&spec, &psi)?;
            rational_to_f64(&v)
        }
        CChoice::Optimal => optimize_psi(&spec, &psi, &a.search, &mut header)?.c_star,
    };
    let grid = grid_for(&spec, &a.search)?;
    if a.c != "optimal" {
        header.add("grid", format!("{} ({} points)", grid.label(), grid.len()));
    }
    header.add("c", c);
    let values: Vec<f64> = if error {
        let exact = exact.expect("checked above");
        grid.points()
            .iter()
            .map(|p| error_vs_exact(&psi, &exact, &float_point(p), c))
            .collect::<Result<_>>()?
    } else {
        GridResidual::new(&spec, &psi, &grid)?.residuals(c)?
    };
    let column = if error { "error" } else { "residual" };
    let mut out = header.0;
    let coord = |p: &std::collections::BTreeMap<Var, Rational>, v: Var| {
        p.get(&v).map(|r| format!("{}", rational_to_f64(r))).unwrap_or_default()
    };
    match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "x,t,c,{column}").unwrap();
            for (p, r) in grid.points().iter().zip(&values) {
                writeln!(out, "{},{},{c},{r:.12e}", coord(p, Var::X), coord(p, Var::T)).unwrap();
            }
        }
        Format::StructuredText => {
            for (p, r) in grid.points().iter().zip(&values) {
                let at: Vec<String> =
                    p.iter().map(|(v, x)| format!("{v}={}", rational_to_f64(x))).collect();
                writeln!(out, "point: {} c={c} {column}={r:.12e}", at.join(" ")).unwrap();
            }
        }
    }
    Ok(out)
}

fn float_point(p: &std::collections::BTreeMap<Var, Rational>) -> std::collections::BTreeMap<Var, f64> {
    p.iter().map(|(v, r)| (*v, rational_to_f64(r))).collect()
}

/// Validation lines for one problem; the flag is false when any check fails.
pub fn validation_report(spec: &ProblemSpec, order: usize) -> (bool, Vec<String>) {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |passed: bool, what: String| {
        ok &= passed;
        lines.push(format!("{} {}: {what}", if passed { "PASS" } else { "FAIL" }, spec.id));
    };
    match spec.validate() {
        Ok(()) => record(true, "structure".into()),
        Err(e) => record(false, format!("structure: {e}")),
    }
    let report = verify_conditions(&spec.inverse_plan, &spec.phi, &spec.conditions, 6);
    for check in &report.checks {
        record(check.passed, format!("condition {} ({})", check.condition, check.detail));
    }
    match admp_solve(spec, order) {
        Ok(sol) => {
            let bad = partial_sums(&sol)
                .iter()
                .position(|psi| spec.conditions.iter().any(|c| !c.holds(psi)));
            match bad {
                None => record(true, format!("conditions hold for psi_0..psi_{order}")),
                Some(n) => record(false, format!("psi_{n} violates a condition")),
            }
        }
        Err(e) => record(false, format!("solve: {e}")),
    }
    if let Some(exact) = &spec.exact {
        let mut worst = 0.0f64;
        let mut failure = None;
        for p in spec.default_grid.points() {
            match exact_solution_residual(spec, exact, &float_point(p)) {
                Ok(r) => worst = worst.max(r.abs()),
                Err(e) => failure = Some(e),
            }
        }
        match failure {
            Some(e) => record(false, format!("exact solution {}: {e}", exact.description)),
            None => record(
                worst <= EXACT_RESIDUAL_TOL,
                format!("exact solution {} residual {worst:.3e} on the default grid", exact.description),
            ),
        }
    }
    (ok, lines)
}

fn validate(a: &ValidateArgs) -> CliResult<String> {
    let mut out = String::new();
    let mut ok = true;
    let names: Vec<String> = if a.problem.is_empty() {
        ProblemId::ALL.iter().map(|p| p.name().to_string()).collect()
    } else {
        a.problem.clone()
    };
    for name in &names {
        let spec = if let Ok(id) = name.parse::<ProblemId>() {
            catalog(id)
        } else if Path::new(name).exists() {
            ProblemSpec::load(name)
        } else {
            return Err(usage("--problem", format!("`{name}` is neither a catalog id nor a readable file")));
        };
        match spec {
            Ok(spec) => {
                let (passed, lines) = validation_report(&spec, a.order);
                ok &= passed;
                for l in lines {
                    writeln!(out, "{l}").unwrap();
                }
            }
            Err(e) => {
                ok = false;
                writeln!(out, "FAIL {name}: {e}").unwrap();
            }
        }
    }
    if ok {
        Ok(out)
    } else {
        Err(Failure::Validation(out))
    }
}
