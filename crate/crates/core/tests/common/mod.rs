//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use admp::ratpoly::{rat, rational_to_f64, Monomial};
use admp::residual::SampleGrid;
use admp::series::NonlinearExpr;
use admp::{Polynomial, Rational, Var};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

pub fn p(s: &str) -> Polynomial {
    s.parse().unwrap_or_else(|e| panic!("bad polynomial `{s}`: {e}"))
}

pub fn q(n: i64, d: i64) -> Rational {
    rat(n, d)
}

/// Table 1 as printed: `(n, c, MER_admp, MER_adm)`.
pub const TABLE1: [(usize, f64, f64, f64); 10] = [
    (1, 1.10733, 1.01966e-1, 2.69754e-1),
    (2, 1.21693, 2.22708e-2, 1.01782e-1),
    (3, 1.21761, 2.99159e-3, 4.26177e-2),
    (4, 1.21455, 4.61594e-4, 1.89559e-2),
    (5, 1.21285, 7.58058e-5, 8.77839e-3),
    (6, 1.21203, 1.27843e-5, 4.18515e-3),
    (7, 1.21165, 2.17946e-6, 2.03977e-3),
    (8, 1.21147, 3.72997e-7, 1.01153e-3),
    (9, 1.21139, 6.38943e-8, 5.08700e-4),
    (10, 1.21135, 1.09425e-8, 2.58802e-4),
];

pub fn arb_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

/// Random polynomial in `vars` with total degree at most `max_degree`.
pub fn arb_poly(vars: &'static [Var], max_degree: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let term = (proptest::collection::vec(0..=max_degree, vars.len()), arb_rational());
    proptest::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
        let mut acc = Polynomial::zero();
        for (exps, coeff) in terms {
            let mut e = [0u32; 4];
            let mut budget = max_degree;
            for (v, k) in vars.iter().zip(exps) {
                let k = k.min(budget);
                budget -= k;
                e[v.index()] = k;
            }
            acc = acc + Polynomial::monomial(coeff, Monomial(e));
        }
        acc
    })
}

pub const ALL_VARS: &[Var] = &[Var::T, Var::X, Var::C, Var::Eps];
pub const TX: &[Var] = &[Var::T, Var::X];

/// `N(u) = sum a_j u^j`, `j >= 1`, as an expression and as its coefficient list.
pub fn arb_power_nonlinearity() -> impl Strategy<Value = Vec<(Rational, u32)>> {
    proptest::collection::vec((arb_rational(), 1u32..=4), 1..=3)
}

pub fn power_expr(coeffs: &[(Rational, u32)]) -> NonlinearExpr {
    NonlinearExpr::Add(
        coeffs
            .iter()
            .map(|(a, j)| {
                let base = NonlinearExpr::u();
                let powered = if *j == 1 { base } else { base.pow(*j as i32) };
                NonlinearExpr::constant(Polynomial::constant(a.clone())).times(powered)
            })
            .collect(),
    )
}

/// `N^(m)(u0)` for `N(u) = sum a_j u^j`, differentiated by the power rule.
fn power_derivative(coeffs: &[(Rational, u32)], m: u32, u0: &Polynomial) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (a, j) in coeffs {
        if *j < m {
            continue;
        }
        let falling: i64 = (0..m).map(|i| (*j - i) as i64).product();
        acc = acc + u0.pow(j - m).scale(&(a * Rational::from_integer(falling.into())));
    }
    acc
}

/// The closed forms
/// `A_0 = N(u0)`, `A_1 = N'(u0) u1`, `A_2 = N'(u0) u2 + N''(u0) u1^2 / 2`,
/// `A_3 = N'(u0) u3 + N''(u0) u1 u2 + N'''(u0) u1^3 / 6`.
pub fn closed_form_adomian(coeffs: &[(Rational, u32)], u: &[Polynomial; 4]) -> [Polynomial; 4] {
    let d = |m| power_derivative(coeffs, m, &u[0]);
    let (d1, d2, d3) = (d(1), d(2), d(3));
    [
        d(0),
        &d1 * &u[1],
        &(&d1 * &u[2]) + &(&d2 * &u[1].pow(2)).scale(&q(1, 2)),
        &(&(&d1 * &u[3]) + &(&d2 * &(&u[1] * &u[2]))) + &(&d3 * &u[1].pow(3)).scale(&q(1, 6)),
    ]
}

/// Minimum of `f` over `low, low + step, ...` up to `high`.
pub fn grid_scan(mut f: impl FnMut(f64) -> f64, bracket: (f64, f64), step: f64) -> (f64, f64) {
    let n = ((bracket.1 - bracket.0) / step).round() as usize;
    let mut best = (bracket.0, f64::INFINITY);
    for i in 0..=n {
        let x = bracket.0 + step * i as f64;
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// `max |psi(c) - numerator/denominator|` over the grid, in exact arithmetic.
pub fn sup_error_exact(
    psi: &Polynomial,
    numerator: &Polynomial,
    denominator: &Polynomial,
    grid: &SampleGrid,
    c: &Rational,
) -> Rational {
    let psi = psi.substitute_value(Var::C, c);
    let mut worst = Rational::zero();
    for point in grid.points() {
        let exact = numerator.eval_exact(point).unwrap() / denominator.eval_exact(point).unwrap();
        let e = (psi.eval_exact(point).unwrap() - exact).abs();
        if e > worst {
            worst = e;
        }
    }
    worst
}

pub fn float_point(point: &BTreeMap<Var, Rational>) -> BTreeMap<Var, f64> {
    point.iter().map(|(v, r)| (*v, rational_to_f64(r))).collect()
}

pub fn decimal(x: f64) -> Rational {
    Rational::from_float(x).unwrap()
}

pub fn one() -> Rational {
    Rational::one()
}
