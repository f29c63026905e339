mod common;

use std::time::Duration;

use common::{poly, seeded_poly};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slcpop_conic::{ConicSolution, ResidualReport, SolveStatus, SolverOptions};
use slcpop_core::bestslc::*;
use slcpop_core::oracle::{brute_force_min, sample_feasible_decompositions};
use slcpop_core::poly::Polynomial;
use slcpop_core::problem::Problem;
use slcpop_core::random::{density_for_degree, random_box_instance};
use slcpop_core::rpt::{evaluate_g, generate_lifted_region, RegionOptions};
use slcpop_core::slc::{construct_slc_general, Descriptor};
use slcpop_core::SlcError;

fn unknowns(n: usize, q: f64, r: f64, w: f64) -> (DMatrix<f64>, DVector<f64>, f64) {
    (DMatrix::from_element(n, n, q), DVector::from_element(n, r), w)
}

#[test]
fn one_variable_cubic_rows() {
    let p = poly(1, &[(&[3], 2.0), (&[2], -1.0), (&[1], 0.5), (&[0], 3.0)]);
    let ms = build_matching_system(&p, Family::Degree3).unwrap();
    assert_eq!(ms.rows(), 4);
    let pos = |d: Descriptor| ms.blocks.iter().position(|b| b.descriptor == Some(d.clone())).unwrap();
    let (bx, bq, b1) = (pos(Descriptor::x(0)), pos(Descriptor::one_minus(0)), pos(Descriptor::one()));
    let (pp, r1, w1) = (1.3, -0.4, 2.2);
    let (qq, f1, g1) = (0.7, 1.9, -3.1);
    let (pq, rq, wq) = (-0.2, 0.6, 1.1);
    let mut vals = vec![unknowns(1, 0.0, 0.0, 0.0); ms.blocks.len()];
    vals[bx] = unknowns(1, pp, r1, w1);
    vals[bq] = unknowns(1, qq, f1, g1);
    vals[b1] = unknowns(1, pq, rq, wq);
    let lhs = ms.apply(&vals);
    let row = |e: u32| ms.monomials.iter().position(|m| m.exponents() == [e]).unwrap();
    assert!((lhs[row(3)] - (pp - qq)).abs() < 1e-12);
    assert!((lhs[row(2)] - (r1 + qq - f1 + pq)).abs() < 1e-12);
    assert!((lhs[row(1)] - (w1 + f1 - g1 + rq)).abs() < 1e-12);
    assert!((lhs[row(0)] - (g1 + wq)).abs() < 1e-12);
    assert_eq!(ms.rhs[row(3)], 2.0);
    assert_eq!(ms.rhs[row(0)], 3.0);
}

#[test]
fn zero_polynomial_is_homogeneous() {
    let ms = build_matching_system(&Polynomial::zero(2), Family::Degree3).unwrap();
    assert!(ms.rhs.iter().all(|&s| s == 0.0));
    let zeros = vec![unknowns(2, 0.0, 0.0, 0.0); ms.blocks.len()];
    assert!(ms.apply(&zeros).iter().all(|&v| v == 0.0));
}

#[test]
fn matching_rows_cover_all_monomials() {
    // binom(n + d, d)
    let ms = build_matching_system(&poly(3, &[(&[1, 1, 1], 1.0)]), Family::Degree4).unwrap();
    assert_eq!(ms.rows(), 35);
}

#[test]
fn family_mismatch_is_an_error() {
    let p = poly(2, &[(&[4, 0], 1.0)]);
    assert!(build_matching_system(&p, Family::Degree3).is_err());
    assert!(build_matching_system(&p, Family::General(7)).is_err());
}

#[test]
fn psd_census_degree3_two_variables() {
    let p = Problem::unit(poly(2, &[(&[2, 1], 1.0), (&[0, 1], -1.0)]));
    let region = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    let model = build_best_slc_program(&p, &region, Family::Degree3).unwrap();
    let dims = model.program.psd_dims();
    assert_eq!(dims.iter().filter(|&&d| d == 2).count(), 5);
    assert_eq!(dims.iter().filter(|&&d| d == 3).count(), 5);
    assert_eq!(dims.len(), 10);
}

#[test]
fn largest_block_is_n_plus_one() {
    for d in 3..=6u32 {
        for n in 1..=3usize {
            let p = Problem::unit(seeded_poly(d as u64 * 10 + n as u64, n, d, 0.3));
            let family = Family::for_degree(d);
            let region = generate_lifted_region(&p, d, RegionOptions::default()).unwrap();
            let model = build_best_slc_program(&p, &region, family).unwrap();
            assert_eq!(model.max_psd_dim(), n + 1, "n {n} d {d}");
        }
    }
}

#[test]
fn cubic_minus_linear_root_bound() {
    let p = Problem::unit(poly(1, &[(&[3], 1.0), (&[1], -1.0)]));
    let rb = solve_relaxation(&p, &RootOptions::default()).unwrap();
    let min = -2.0 / (3.0 * 3f64.sqrt());
    assert!(rb.lower_bound <= min + 1e-6);
    assert!(rb.lower_bound >= min - 1e-5, "lb {}", rb.lower_bound);
    assert!((rb.x[0] - 1.0 / 3f64.sqrt()).abs() < 1e-3, "x {:?}", rb.x);
}

#[test]
fn convex_quadratic_is_tight() {
    let p = Problem::unit(poly(1, &[(&[2], 1.0)]));
    let rb = solve_relaxation(&p, &RootOptions::default()).unwrap();
    assert!(rb.lower_bound.abs() < 1e-6, "lb {}", rb.lower_bound);
    assert!(rb.x[0].abs() < 1e-3);
    assert!(rb.clip >= 0.0);
}

#[test]
fn zero_objective_bounds_are_zero() {
    let p = Problem::unit(Polynomial::zero(2));
    for variant in [Variant::BestSlc, Variant::Gershgorin] {
        let opts = RootOptions {
            variant,
            ..RootOptions::default()
        };
        let rb = solve_relaxation(&p, &opts).unwrap();
        assert!(rb.lower_bound.abs() < 1e-6, "{variant:?}: {}", rb.lower_bound);
        assert!(rb.lower_bound <= 1e-12);
    }
}

#[test]
fn unsolved_status_is_an_error() {
    let p = Problem::unit(poly(1, &[(&[3], 1.0)]));
    let region = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    let model = build_best_slc_program(&p, &region, Family::Degree3).unwrap();
    let m = model.program.num_vars();
    let rows = model.program.num_rows();
    let sol = ConicSolution {
        status: SolveStatus::Infeasible,
        primal: vec![0.0; m],
        dual: vec![0.0; rows],
        primal_objective: 0.0,
        dual_objective: 0.0,
        residuals: ResidualReport::default(),
        iterations: 0,
        solve_time: Duration::ZERO,
    };
    match extract_bound_and_point(&model, &sol) {
        Err(SlcError::SolverStatus { status }) => assert_eq!(status, SolveStatus::Infeasible),
        other => panic!("expected a status error, got {other:?}"),
    }
    assert!(extract_certified(&model, &sol).is_err());
    let limit = ConicSolution {
        status: SolveStatus::IterationLimit,
        ..sol
    };
    assert!(extract_bound_and_point(&model, &limit).is_err());
    assert!(extract_certified(&model, &limit).is_ok());
}

#[test]
fn gershgorin_rejects_quartics() {
    let p = Problem::unit(poly(1, &[(&[4], 1.0)]));
    let region = generate_lifted_region(&p, 4, RegionOptions::default()).unwrap();
    assert!(matches!(
        build_gershgorin_variant(&p, &region),
        Err(SlcError::UnsupportedDegree { degree: 4, .. })
    ));
}

#[test]
fn gershgorin_matches_in_one_variable() {
    for seed in 0..4 {
        let p = random_box_instance(1, 3, seed);
        let best = solve_relaxation(&p, &RootOptions::default()).unwrap().lower_bound;
        let opts = RootOptions {
            variant: Variant::Gershgorin,
            ..RootOptions::default()
        };
        let gersh = solve_relaxation(&p, &opts).unwrap().lower_bound;
        assert!((best - gersh).abs() <= 1e-6, "seed {seed}: {best} vs {gersh}");
    }
}

#[test]
fn gershgorin_is_weaker() {
    for seed in 0..4 {
        let p = random_box_instance(3, 3, 100 + seed);
        let best = solve_relaxation(&p, &RootOptions::default()).unwrap().lower_bound;
        let opts = RootOptions {
            variant: Variant::Gershgorin,
            ..RootOptions::default()
        };
        let gersh = solve_relaxation(&p, &opts).unwrap().lower_bound;
        assert!(gersh <= best + 1e-6, "seed {seed}: {gersh} > {best}");
    }
}

#[test]
fn bound_is_valid_and_beats_the_construction() {
    for (seed, n, d) in [(1u64, 2usize, 3u32), (2, 3, 3), (3, 2, 4)] {
        let p = random_box_instance(n, d, seed);
        let rb = solve_relaxation(&p, &RootOptions::default()).unwrap();
        let oracle = brute_force_min(&p, 21, 30).unwrap();
        assert!(rb.lower_bound <= oracle.value + 1e-6, "seed {seed}");
        let region = generate_lifted_region(&p, d, RegionOptions::default()).unwrap();
        let dec = construct_slc_general(&p.objective, d).unwrap();
        let fixed = build_fixed_program(&region, &dec, &[]).unwrap();
        let construction = solve_fixed(&fixed, &SolverOptions::with_tol(1e-8)).unwrap();
        assert!(rb.lower_bound >= construction - 1e-6, "seed {seed}: {} < {construction}", rb.lower_bound);
    }
}

#[test]
fn duality_sandwich() {
    let p = random_box_instance(2, 3, 7);
    let rb = solve_relaxation(&p, &RootOptions::default()).unwrap();
    let ms = build_matching_system(&p.objective, Family::Degree3).unwrap();
    let region = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    for dec in sample_feasible_decompositions(&ms, 10, 3).unwrap() {
        let g = evaluate_g(&region.space, &rb.lifted, &dec);
        assert!(rb.objective >= g - 1e-6, "{} < {g}", rb.objective);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn construction_satisfies_rows(seed in any::<u64>(), n in 1usize..=4, d in 3u32..=5) {
        let p = seeded_poly(seed, n, d, density_for_degree(d));
        let ms = build_matching_system(&p, Family::for_degree(d)).unwrap();
        let dec = construct_slc_general(&p, d).unwrap();
        let res = ms.residual(&dec).unwrap();
        let scale = p.max_abs_coef().max(1.0);
        prop_assert!(res.iter().all(|r| r.abs() <= 1e-9 * scale));
    }
}
