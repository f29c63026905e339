mod common;

use std::collections::BTreeSet;

use common::{poly, seeded_point, seeded_poly};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slcpop_core::poly::{BoxDomain, Polynomial};
use slcpop_core::problem::{Constraint, Problem};
use slcpop_core::random::density_for_degree;
use slcpop_core::rpt::*;
use slcpop_core::slc::construct_slc_general;

fn outer(x: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(x);
    &v * v.transpose()
}

fn row_key(r: &LinearRow) -> (i64, Vec<(usize, i64)>) {
    let q = |v: f64| (v * 1e9).round() as i64;
    let mut c: Vec<(usize, i64)> = r.coeffs.iter().map(|&(k, v)| (k, q(v))).filter(|e| e.1 != 0).collect();
    c.sort();
    (q(r.constant), c)
}

#[test]
fn one_variable_region() {
    let p = Problem::unit(poly(1, &[(&[3], 1.0)]));
    let reg = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    let s = &reg.space;
    let (x, u) = (s.x(0), s.u(0, 0));
    let got: BTreeSet<_> = reg.rows.iter().map(row_key).collect();
    let rows = [
        (0.0, vec![(x, 1.0)]),
        (1.0, vec![(x, -1.0)]),
        (0.0, vec![(u, 1.0)]),
        (0.0, vec![(x, 1.0), (u, -1.0)]),
        (1.0, vec![(x, -2.0), (u, 1.0)]),
    ];
    let want: BTreeSet<_> = rows
        .into_iter()
        .map(|(c, coeffs)| {
            row_key(&LinearRow {
                constant: c,
                coeffs,
                kind: RowKind::NonNegative,
                tag: String::new(),
            })
        })
        .collect();
    assert_eq!(got, want);
    assert!(reg.rows.iter().all(|r| r.kind == RowKind::NonNegative));
}

#[test]
fn two_variable_mccormick_count() {
    let p = Problem::unit(poly(2, &[(&[2, 1], 1.0)]));
    let reg = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    let products = reg.rows.iter().filter(|r| r.tag.contains('*')).count();
    assert_eq!(products, 12);
    assert_eq!(reg.rows.len(), 4 + 12);
}

#[test]
fn region_errors() {
    let b = BoxDomain::new(vec![-1.0], vec![1.0]).unwrap();
    let p = Problem::new(poly(1, &[(&[3], 1.0)]), b).unwrap();
    assert!(generate_lifted_region(&p, 3, RegionOptions::default()).is_err());
    let p = Problem::unit(poly(1, &[(&[3], 1.0)]));
    assert!(generate_lifted_region(&p, 3, RegionOptions { bound_depth: Some(3) }).is_err());
}

#[test]
fn linear_constraint_rows() {
    let p = Problem::unit(poly(2, &[(&[1, 1], 1.0)])).with_constraint(Constraint::Linear {
        a: vec![1.0, 1.0],
        b: 1.5,
    });
    let reg = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    let tagged = reg.rows.iter().filter(|r| r.tag.starts_with("g1")).count();
    assert_eq!(tagged, 1 + 4);
}

#[test]
fn log_sum_exp_passes_through() {
    let p = Problem::unit(poly(2, &[(&[1, 1], 1.0)])).with_constraint(Constraint::log_sum_exp(2, 1.0));
    let reg = generate_lifted_region(&p, 3, RegionOptions::default()).unwrap();
    assert_eq!(reg.convex.len(), 1);
}

#[test]
fn perspective_limits() {
    let q = DMatrix::identity(2, 2);
    let r = DVector::from_vec(vec![1.0, -1.0]);
    let zero = DVector::zeros(2);
    assert_eq!(perspective(&q, &r, 3.0, &zero, 0.0), 0.0);
    let z = DVector::from_vec(vec![0.5, 0.0]);
    assert_eq!(perspective(&q, &r, 3.0, &z, 0.0), f64::INFINITY);
    // t·q(z/t) at t = 1 is q(z)
    assert!((perspective(&q, &r, 3.0, &z, 1.0) - (0.25 + 0.5 + 3.0)).abs() < 1e-15);
}

#[test]
fn theta_vanishes_at_corner() {
    let x = [1.0, 1.0];
    let th = theta_ij(&x, &outer(&x), &exact_v(&x), 0, 1);
    assert!(th.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn cube_at_exact_lifting() {
    let p = poly(1, &[(&[3], 1.0)]);
    let dec = construct_slc_general(&p, 3).unwrap();
    for x in [0.0, 0.3, 1.0] {
        let g = evaluate_g3(&[x], &outer(&[x]), &dec);
        assert!((g - x * x * x).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_lifting_is_feasible(seed in any::<u64>(), n in 1usize..=4, d in 3u32..=5) {
        let p = Problem::unit(seeded_poly(seed, n, d, 0.3)).with_constraint(Constraint::Linear {
            a: vec![1.0; n],
            b: n as f64,
        });
        let reg = generate_lifted_region(&p, d, RegionOptions::default()).unwrap();
        for s in 0..10 {
            let x = seeded_point(seed.wrapping_add(s), n);
            let z = reg.space.exact(&x);
            prop_assert!(reg.max_violation(&z) <= 1e-10);
        }
    }

    #[test]
    fn relaxation_is_exact_on_the_moment_curve(seed in any::<u64>(), n in 1usize..=4, d in 3u32..=4) {
        let p = seeded_poly(seed, n, d, density_for_degree(d));
        let dec = construct_slc_general(&p, d).unwrap();
        let x = seeded_point(seed, n);
        let g = if d == 3 {
            evaluate_g3(&x, &outer(&x), &dec)
        } else {
            evaluate_g4(&x, &outer(&x), &exact_v(&x), &dec)
        };
        prop_assert!((g - p.eval(&x)).abs() <= 1e-9 * p.max_abs_coef().max(1.0));
    }

    #[test]
    fn linearize_matches_evaluation(seed in any::<u64>(), n in 1usize..=4) {
        let space = LiftedSpace::new(n, 4);
        let p: Polynomial = seeded_poly(seed, n, 3, 0.5);
        let x = seeded_point(seed, n);
        let v = space.linear_value(&p, &space.exact(&x)).unwrap();
        prop_assert!((v - p.eval(&x)).abs() <= 1e-10 * p.max_abs_coef().max(1.0));
    }
}
