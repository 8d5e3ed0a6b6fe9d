mod common;

use admp::calculus::{apply_inverse, InversePlan};
use admp::series::{
    adomian_list, compose, series_int_pow, series_inverse, series_mul, IncrementalComposer, NonlinearExpr,
    TruncatedSeries,
};
use admp::{Polynomial, Rational, Var};
use common::*;
use num_traits::Zero;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, ..ProptestConfig::default() }
}

fn arb_var() -> impl Strategy<Value = Var> {
    proptest::sample::select(Var::ALL.to_vec())
}

fn arb_plan() -> impl Strategy<Value = InversePlan> {
    proptest::collection::vec((proptest::sample::select(vec![Var::T, Var::X]), arb_rational()), 1..=4)
        .prop_map(|steps| InversePlan::new(steps).unwrap())
}

/// A series whose constant term is a nonzero rational.
fn arb_invertible_series() -> impl Strategy<Value = TruncatedSeries> {
    (arb_rational().prop_filter("nonzero", |r| !r.is_zero()), proptest::collection::vec(arb_poly(TX, 2, 3), 1..=4))
        .prop_map(|(lead, rest)| {
            let mut coeffs = vec![Polynomial::constant(lead)];
            coeffs.extend(rest);
            TruncatedSeries::new(coeffs)
        })
}

fn arb_expr() -> impl Strategy<Value = NonlinearExpr> {
    let leaf = prop_oneof![
        (0u32..=2, 0u32..=1).prop_map(|(x, t)| NonlinearExpr::deriv(x, t)),
        arb_poly(TX, 1, 2).prop_map(NonlinearExpr::constant),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(NonlinearExpr::Add),
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(NonlinearExpr::Mul),
            (inner, 2i32..=3).prop_map(|(e, n)| e.pow(n)),
        ]
    })
}

fn terms() -> impl Strategy<Value = Vec<Polynomial>> {
    proptest::collection::vec(arb_poly(TX, 2, 3), 4)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ring_axioms(a in arb_poly(ALL_VARS, 6, 5), b in arb_poly(ALL_VARS, 6, 5), c in arb_poly(ALL_VARS, 6, 5)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Polynomial::zero());
        prop_assert_eq!(&a * &Polynomial::one(), a.clone());
        prop_assert!((&a * &Polynomial::zero()).is_zero());
    }

    #[test]
    fn derivative_undoes_antiderivative(a in arb_poly(ALL_VARS, 6, 5), v in arb_var(), lower in arb_rational()) {
        let back = a.antideriv(v, &lower);
        prop_assert_eq!(back.diff(v), a);
        prop_assert!(back.substitute_value(v, &lower).is_zero());
    }

    #[test]
    fn linear_operator_inverts_plan(plan in arb_plan(), a in arb_poly(ALL_VARS, 6, 5)) {
        let image = apply_inverse(&plan, &a);
        prop_assert_eq!(plan.linear_operator().apply(&image), a);
    }

    #[test]
    fn text_round_trip(a in arb_poly(ALL_VARS, 6, 6)) {
        let text = a.to_string();
        let back: Polynomial = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn exact_and_float_evaluation_agree(a in arb_poly(ALL_VARS, 4, 5), t in arb_rational(), x in arb_rational()) {
        let point = std::collections::BTreeMap::from([
            (Var::T, t), (Var::X, x), (Var::C, q(3, 4)), (Var::Eps, q(1, 3)),
        ]);
        let exact = admp::ratpoly::rational_to_f64(&a.eval_exact(&point).unwrap());
        let float = a.eval_f64(&float_point(&point)).unwrap();
        prop_assert!((exact - float).abs() <= 1e-9 * (1.0 + exact.abs()), "{} vs {}", exact, float);
    }

    #[test]
    fn series_inverse_times_series_is_one(a in arb_invertible_series(), n in 1i32..=3) {
        let one = TruncatedSeries::one(a.order());
        prop_assert_eq!(series_mul(&series_inverse(&a).unwrap(), &a), one.clone());
        let up = series_int_pow(&a, n).unwrap();
        let down = series_int_pow(&a, -n).unwrap();
        prop_assert_eq!(series_mul(&up, &down), one);
    }

    #[test]
    fn composition_is_linear_and_multiplicative(n1 in arb_expr(), n2 in arb_expr(), u in terms()) {
        let f = compose(&n1, &u, 3).unwrap();
        let g = compose(&n2, &u, 3).unwrap();
        let sum = compose(&NonlinearExpr::Add(vec![n1.clone(), n2.clone()]), &u, 3).unwrap();
        let product = compose(&NonlinearExpr::Mul(vec![n1, n2]), &u, 3).unwrap();
        prop_assert_eq!(sum, f.add(&g));
        prop_assert_eq!(product, series_mul(&f, &g));
    }

    #[test]
    fn adomian_polynomials_match_closed_forms(coeffs in arb_power_nonlinearity(), u in terms()) {
        let u: [Polynomial; 4] = u.try_into().unwrap();
        let got = adomian_list(&power_expr(&coeffs), &u).unwrap();
        prop_assert_eq!(&got[..], &closed_form_adomian(&coeffs, &u)[..]);
    }

    #[test]
    fn convective_term_is_a_discrete_convolution(u in terms()) {
        // N = u u_x gives A_k = sum_i u_i d/dx u_{k-i}
        let n = NonlinearExpr::u().times(NonlinearExpr::deriv(1, 0));
        let got = adomian_list(&n, &u).unwrap();
        for k in 0..4 {
            let mut expected = Polynomial::zero();
            for i in 0..=k {
                expected = expected + &u[i] * &u[k - i].diff(Var::X);
            }
            prop_assert_eq!(&got[k], &expected);
        }
    }

    #[test]
    fn incremental_composition_matches_fresh(n in arb_expr(), u in terms()) {
        let mut inc = IncrementalComposer::new(&n).unwrap();
        for k in 0..u.len() {
            let a = inc.push(&u[k]).unwrap();
            let fresh = compose(&n, &u[..=k], k).unwrap();
            prop_assert_eq!(&a, &fresh.coeffs[k]);
        }
    }

    #[test]
    fn expression_text_round_trip(n in arb_expr()) {
        let text = n.to_string();
        let back: NonlinearExpr = text.parse().unwrap();
        let u = vec![Polynomial::var(Var::X) + Polynomial::one(), Polynomial::var(Var::T)];
        prop_assert_eq!(compose(&back, &u, 2).unwrap(), compose(&n, &u, 2).unwrap(), "{}", text);
    }
}

#[test]
fn negative_powers_need_constant_leading_term() {
    let a = TruncatedSeries::new(vec![p("1 + x"), p("t")]);
    assert!(matches!(series_inverse(&a), Err(admp::Error::NonInvertibleLeadingTerm)));
    let a = TruncatedSeries::new(vec![Polynomial::zero(), p("1")]);
    assert!(series_int_pow(&a, -2).is_err());
}

#[test]
fn reciprocal_power_closed_form() {
    // N = u^-3 with u_0 = 1: A_1 = -3 u_1, A_2 = -3 u_2 + 6 u_1^2, A_3 = -3 u_3 + 12 u_1 u_2 - 10 u_1^3
    let u = [p("1"), p("x^2"), p("x - t"), p("3*x*t")];
    let n = NonlinearExpr::u().pow(-3);
    let got = adomian_list(&n, &u).unwrap();
    let scale = |k: i64, e: &Polynomial| e.scale(&Rational::from_integer(k.into()));
    assert_eq!(got[0], p("1"));
    assert_eq!(got[1], scale(-3, &u[1]));
    assert_eq!(got[2], scale(-3, &u[2]) + scale(6, &u[1].pow(2)));
    assert_eq!(got[3], scale(-3, &u[3]) + scale(12, &(&u[1] * &u[2])) + scale(-10, &u[1].pow(3)));
}
