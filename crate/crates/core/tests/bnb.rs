mod common;

use common::poly;
use nalgebra::DMatrix;
use slcpop_core::bestslc::{solve_relaxation, RootOptions};
use slcpop_core::bnb::*;
use slcpop_core::local::{local_search_upper_bound, projected_gradient, INCUMBENT_TOL};
use slcpop_core::oracle::brute_force_min;
use slcpop_core::poly::BoxDomain;
use slcpop_core::problem::{Constraint, Problem};
use slcpop_core::random::{random_box_instance, random_constrained_instance};

fn opts() -> BnbOptions {
    BnbOptions {
        threads: 1,
        ..BnbOptions::default()
    }
}

#[test]
fn cubic_is_root_exact() {
    let p = Problem::unit(poly(1, &[(&[3], 1.0), (&[1], -1.0)]));
    let r = solve_global(&p, &opts()).unwrap();
    assert_eq!(r.status, BnbStatus::Optimal);
    assert!((r.value + 0.3849).abs() < 1e-3);
    assert_eq!(r.hyperplanes, 0);
    assert!(r.gap <= 1e-4);
    assert!(r.lower_bound <= r.value);
}

#[test]
fn bilinear_reaches_the_corner() {
    let p = Problem::unit(poly(2, &[(&[1, 1], -1.0)]));
    let r = solve_global(&p, &opts()).unwrap();
    assert!((r.value + 1.0).abs() < 1e-9);
    let x = r.point.unwrap();
    assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
}

#[test]
fn convex_sum_of_squares() {
    let p = Problem::unit(poly(3, &[(&[2, 0, 0], 1.0), (&[0, 2, 0], 1.0), (&[0, 0, 2], 1.0)]));
    let r = solve_global(&p, &opts()).unwrap();
    assert!(r.value.abs() < 1e-9);
    assert_eq!(r.hyperplanes, 0);
}

#[test]
fn shifted_box() {
    // x³ − x on [−1, 1] has minimum −2/(3√3) at 1/√3
    let b = BoxDomain::new(vec![-1.0], vec![1.0]).unwrap();
    let p = Problem::new(poly(1, &[(&[3], 1.0), (&[1], -1.0)]), b).unwrap();
    let r = solve_global(&p, &opts()).unwrap();
    assert!((r.value + 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-6);
    assert!(r.lower_bound <= r.value + 1e-9);
}

#[test]
fn branch_on_most_violated_diagonal() {
    let b = BoxDomain::unit(2);
    let u = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.26]);
    let s = branch(&b, &[0.5, 0.5], &u);
    assert_eq!(s.var, 0);
    assert_eq!(s.at, 0.5);
    assert_eq!(s.left.upper, vec![0.5, 1.0]);
    assert_eq!(s.right.lower, vec![0.5, 0.0]);
}

#[test]
fn exact_lifting_splits_widest_edge() {
    let b = BoxDomain::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
    let t = [0.3, 0.6];
    let u = DMatrix::from_fn(2, 2, |i, j| t[i] * t[j]);
    let s = branch(&b, &t, &u);
    assert_eq!(s.var, 1);
    assert_eq!(s.at, 0.0);
}

#[test]
fn split_point_is_clamped() {
    let b = BoxDomain::new(vec![2.0], vec![4.0]).unwrap();
    let u = DMatrix::from_element(1, 1, 0.5);
    let s = branch(&b, &[0.05], &u);
    assert!((s.at - 2.4).abs() < 1e-15);
    let s = branch(&b, &[0.95], &u);
    assert!((s.at - 3.6).abs() < 1e-15);
}

#[test]
fn gap_formula() {
    assert_eq!(relative_gap(-2.0, -3.0), 0.5);
    assert_eq!(relative_gap(0.5, 0.0), 0.5);
    assert_eq!(relative_gap(1.0, 2.0), 0.0);
    assert_eq!(relative_gap(f64::INFINITY, f64::INFINITY), 0.0);
}

#[test]
fn local_search_examples() {
    let p = Problem::unit(poly(1, &[(&[2], 1.0)]));
    let r = local_search_upper_bound(&p, &[0.7], 0, 0);
    assert_eq!(r.value, 0.0);
    assert_eq!(r.x.unwrap(), vec![0.0]);

    let p = Problem::unit(poly(1, &[(&[3], 1.0), (&[1], -1.0)]));
    let r = local_search_upper_bound(&p, &[0.5], 0, 0);
    assert!((r.x.unwrap()[0] - 1.0 / 3f64.sqrt()).abs() < 1e-6);
    assert!((r.value + 0.3849).abs() < 1e-4);

    let p = Problem::unit(poly(2, &[(&[1, 1], 1.0)])).with_constraint(Constraint::Linear {
        a: vec![1.0, 0.0],
        b: -1.0,
    });
    let r = local_search_upper_bound(&p, &[0.5, 0.5], 20, 0);
    assert!(!r.feasible());
    assert_eq!(r.value, f64::INFINITY);
}

#[test]
fn projected_gradient_stays_in_box() {
    let b = BoxDomain::new(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap();
    let f = |x: &[f64]| (-(x[0] + x[1]), vec![-1.0, -1.0]);
    assert_eq!(projected_gradient(f, &b, &[0.0, 0.5]), vec![2.0, 1.0]);
}

#[test]
fn infeasible_problem() {
    let p = Problem::unit(poly(2, &[(&[1, 1], 1.0)])).with_constraint(Constraint::Linear {
        a: vec![1.0, 1.0],
        b: -1.0,
    });
    let r = solve_global(
        &p,
        &BnbOptions {
            max_nodes: Some(50),
            ..opts()
        },
    )
    .unwrap();
    assert!(r.point.is_none());
    assert_eq!(r.value, f64::INFINITY);
    assert!(matches!(r.status, BnbStatus::Infeasible | BnbStatus::NodeLimit));
}

#[test]
fn node_limit_keeps_valid_bounds() {
    let p = random_box_instance(4, 3, 21);
    let r = solve_global(
        &p,
        &BnbOptions {
            max_nodes: Some(1),
            gap: 1e-12,
            ..opts()
        },
    )
    .unwrap();
    let oracle = brute_force_min(&p, 21, 30).unwrap();
    assert!(r.lower_bound <= oracle.value + 1e-6);
    assert!(r.value >= oracle.value - 1e-9);
    if r.gap > 1e-12 {
        assert_eq!(r.status, BnbStatus::NodeLimit);
    }
}

#[test]
fn incumbents_are_feasible() {
    for seed in 0..3 {
        let p = random_constrained_instance(3, 3, 500 + seed);
        let r = solve_global(&p, &opts()).unwrap();
        let x = r.point.expect("feasible instance");
        assert!(p.max_violation(&x) <= INCUMBENT_TOL);
        assert!(p.bounds.contains(&x, 0.0));
        let oracle = brute_force_min(&p, 21, 30).unwrap();
        assert!(r.value <= oracle.value + 1e-3 * oracle.value.abs().max(1.0), "seed {seed}");
        assert!(r.lower_bound <= oracle.value + 1e-6);
    }
}

#[test]
fn sub_box_bounds_are_valid() {
    for seed in 0..6u64 {
        let p = random_box_instance(2, 3, 900 + seed);
        let lo = vec![0.1 * (seed % 3) as f64, 0.25];
        let hi = vec![lo[0] + 0.5, 0.9];
        let sub = p.restricted(&BoxDomain::new(lo, hi).unwrap());
        let lb = solve_relaxation(&sub, &RootOptions::default()).unwrap().lower_bound;
        let min = brute_force_min(&sub, 21, 30).unwrap().value;
        assert!(lb <= min + 1e-5, "seed {seed}: {lb} > {min}");
    }
}

#[test]
fn threads_agree() {
    let p = random_box_instance(3, 3, 33);
    let one = solve_global(&p, &opts()).unwrap();
    let two = solve_global(
        &p,
        &BnbOptions {
            threads: 2,
            ..opts()
        },
    )
    .unwrap();
    assert!((one.value - two.value).abs() <= 1e-4 * one.value.abs().max(1.0));
}

#[test]
fn status_names() {
    assert_eq!(BnbStatus::Optimal.as_str(), "optimal");
    assert_eq!(BnbStatus::TimeLimit.as_str(), "time-limit");
    assert_eq!(THREADS_ENV, "SLC_POPT_THREADS");
}
