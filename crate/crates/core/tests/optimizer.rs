mod common;

use admp::residual::{
    averaged_residual_exact, error_remainder, max_error_remainder, minimize_scalar, optimal_c, GridResidual,
    OptimizeOptions, DEFAULT_BRACKET, DEFAULT_TOL,
};
use admp::{admp_solve, catalog, partial_sum, Error, Polynomial, ProblemId, ProblemSpec, Var};
use common::*;

/// Catalog problem with `eps` fixed where it appears.
fn numeric_problem(id: ProblemId) -> ProblemSpec {
    let spec = catalog(id).unwrap();
    match id {
        ProblemId::HeatTransfer => spec.bind(Var::Eps, &q(1, 2)),
        _ => spec,
    }
}

fn psi(spec: &ProblemSpec, n: usize) -> Polynomial {
    partial_sum(&admp_solve(spec, n).unwrap(), n, None).unwrap()
}

#[test]
fn brent_agrees_with_a_fine_grid_scan() {
    for id in ProblemId::ALL {
        let spec = numeric_problem(id);
        for n in [1, 5, 10] {
            let psi = psi(&spec, n);
            let e = GridResidual::new(&spec, &psi, &spec.default_grid).unwrap();
            let r = optimal_c(&spec, &psi, &spec.default_grid, DEFAULT_BRACKET, DEFAULT_TOL).unwrap();
            let (scan, e_scan) = grid_scan(|c| e.mean_square(c).unwrap(), DEFAULT_BRACKET, 1e-4);
            assert!(
                (scan - r.c_star).abs() <= 2e-4,
                "{} n={n}: Brent {} vs scan {scan} (E {} vs {e_scan})",
                id.name(),
                r.c_star,
                r.e_at_c_star
            );
            assert!(r.e_at_c_star <= e_scan * (1.0 + 1e-9));
            assert!(e.mean_square(1.0).unwrap() >= r.e_at_c_star, "{} n={n}: E(1) < E(c*)", id.name());
            assert!(r.local_minima.iter().any(|&(c, _)| c == r.c_star));
        }
    }
}

#[test]
fn grid_residual_matches_exact_rational_evaluation() {
    for id in [ProblemId::HeatTransfer, ProblemId::Burgers, ProblemId::Rlw] {
        let spec = numeric_problem(id);
        let psi = psi(&spec, 6);
        let e = GridResidual::new(&spec, &psi, &spec.default_grid).unwrap();
        for c in [q(1, 2), q(4, 5), q(1, 1), q(7, 5)] {
            let exact = admp::ratpoly::rational_to_f64(
                &averaged_residual_exact(&spec, &psi, &spec.default_grid, &c).unwrap(),
            );
            let float = e.mean_square(admp::ratpoly::rational_to_f64(&c)).unwrap();
            assert!((exact - float).abs() <= 1e-9 * exact.max(1e-300), "{} c={c}: {exact} vs {float}", id.name());
        }
    }
}

#[test]
fn mer_is_at_least_a_dense_independent_scan() {
    let spec = catalog(ProblemId::NemsVdw).unwrap();
    for n in [1, 3] {
        let psi = psi(&spec, n);
        for c in [1.0, 1.2] {
            let mer = max_error_remainder(&spec, &psi, c, &spec.domain, 1001).unwrap();
            let mut scan: f64 = 0.0;
            for i in 0..=20000 {
                let point = std::collections::BTreeMap::from([(Var::X, i as f64 / 20000.0)]);
                scan = scan.max(error_remainder(&spec, &psi, &point, c).unwrap().abs());
            }
            assert!(mer >= scan * (1.0 - 1e-12), "n={n} c={c}: {mer} < {scan}");
            assert!(mer <= scan * (1.0 + 1e-6), "n={n} c={c}: {mer} far above {scan}");
        }
    }
}

#[test]
fn minimum_outside_the_bracket_is_reported() {
    let spec = catalog(ProblemId::Burgers).unwrap();
    let psi = psi(&spec, 1);
    let r = optimal_c(&spec, &psi, &spec.default_grid, (1.5, 2.0), DEFAULT_TOL);
    assert!(matches!(r, Err(Error::BracketError { .. })), "{r:?}");
    let r = optimal_c(&spec, &psi, &spec.default_grid, (2.0, 1.0), DEFAULT_TOL);
    assert!(matches!(r, Err(Error::InvalidBracket { .. })));
}

#[test]
fn multimodal_objective_finds_the_deeper_of_two_close_minima() {
    // two wells 0.03 apart, the right one deeper; one coarse cell holds both
    let f = |c: f64| {
        let a = (c - 0.78).powi(2) * 1e4 + 0.0025;
        let b = (c - 0.81).powi(2) * 1e4 + 0.0024;
        Ok(a.min(b))
    };
    let r = minimize_scalar(f, (0.1, 2.0), 1e-10, OptimizeOptions::default()).unwrap();
    assert!((r.c_star - 0.81).abs() < 1e-6, "{r:?}");
}

#[test]
fn repeated_evaluation_is_bit_identical() {
    let spec = catalog(ProblemId::Rlw).unwrap();
    let psi = psi(&spec, 5);
    let a = optimal_c(&spec, &psi, &spec.default_grid, DEFAULT_BRACKET, DEFAULT_TOL).unwrap();
    let b = optimal_c(&spec, &psi, &spec.default_grid, DEFAULT_BRACKET, DEFAULT_TOL).unwrap();
    assert_eq!(a.c_star.to_bits(), b.c_star.to_bits());
    assert_eq!(a.e_at_c_star.to_bits(), b.e_at_c_star.to_bits());
}

#[test]
fn optimal_c_beats_adm_on_the_exact_error() {
    for (id, numerator) in [(ProblemId::Burgers, p("x")), (ProblemId::Rlw, p("x - t"))] {
        let spec = catalog(id).unwrap();
        for n in [4, 8] {
            let psi = psi(&spec, n);
            let r = optimal_c(&spec, &psi, &spec.default_grid, DEFAULT_BRACKET, DEFAULT_TOL).unwrap();
            let den = p("1 + t");
            let at_opt = sup_error_exact(&psi, &numerator, &den, &spec.default_grid, &decimal(r.c_star));
            let at_one = sup_error_exact(&psi, &numerator, &den, &spec.default_grid, &one());
            assert!(at_opt < at_one, "{} n={n}", id.name());
        }
    }
}
