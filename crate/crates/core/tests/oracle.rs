mod common;

use common::{poly, seeded_poly};
use proptest::prelude::*;
use slcpop_core::bestslc::{build_matching_system, Family, FamilyBlock};
use slcpop_core::oracle::*;
use slcpop_core::poly::Polynomial;
use slcpop_core::problem::Problem;
use slcpop_core::random::{density_for_degree, random_box_instance, random_constrained_instance};
use slcpop_core::slc::{construct_slc_general, reconstruct};
use slcpop_core::SlcError;

#[test]
fn parabola_on_grid() {
    let p = Problem::unit(poly(1, &[(&[2], 1.0), (&[1], -1.0)]));
    let r = brute_force_min(&p, 101, 0).unwrap();
    assert_eq!(r.value, -0.25);
    assert_eq!(r.argmin.unwrap(), vec![0.5]);
    assert_eq!(r.grid_k, 101);
}

#[test]
fn cubic_with_refinement() {
    let p = Problem::unit(poly(1, &[(&[3], 1.0), (&[1], -1.0)]));
    let r = brute_force_min(&p, 1001, DEFAULT_STARTS).unwrap();
    let xs = 1.0 / 3f64.sqrt();
    assert!((r.value - (xs * xs * xs - xs)).abs() < 1e-6);
    assert!((r.value + 0.384900).abs() < 1e-6);
    assert!((r.argmin.unwrap()[0] - 0.57735).abs() < 1e-5);
    assert!(r.value <= r.grid_value);
}

#[test]
fn bilinear_corner() {
    let p = Problem::unit(poly(2, &[(&[1, 1], -1.0)]));
    let r = brute_force_min(&p, default_grid(2), DEFAULT_STARTS).unwrap();
    assert_eq!(r.value, -1.0);
    assert_eq!(r.argmin.unwrap(), vec![1.0, 1.0]);
}

#[test]
fn refuses_large_dimension() {
    let p = Problem::unit(Polynomial::zero(7));
    assert!(matches!(
        brute_force_min(&p, 3, 0),
        Err(SlcError::TooManyVariables { n: 7, limit: 6 })
    ));
    assert_eq!(default_grid(4), 21);
    assert_eq!(default_grid(5), 9);
}

#[test]
fn constrained_minimum_is_feasible() {
    for seed in 0..5 {
        let p = random_constrained_instance(2, 3, seed);
        let r = brute_force_min(&p, 21, DEFAULT_STARTS).unwrap();
        let x = r.argmin.expect("the generator keeps instances feasible");
        assert!(p.max_violation(&x) <= 1e-9);
        assert_eq!(r.value, p.objective.eval(&x));
    }
}

#[test]
fn single_sample_is_the_construction() {
    let p = seeded_poly(5, 3, 3, 0.5);
    let ms = build_matching_system(&p, Family::Degree3).unwrap();
    let s = sample_feasible_decompositions(&ms, 1, 0).unwrap();
    assert_eq!(s, vec![construct_slc_general(&p, 3).unwrap()]);
    assert!(sample_feasible_decompositions(&ms, 0, 0).unwrap().is_empty());
}

#[test]
fn sampling_needs_product_form() {
    let p = seeded_poly(5, 2, 3, 0.5);
    let mut ms = build_matching_system(&p, Family::Degree3).unwrap();
    ms.blocks.push(FamilyBlock {
        descriptor: None,
        factor: Polynomial::constant(2, 1.0),
        label: "extra".into(),
    });
    ms.entries.push(vec![]);
    assert!(sample_feasible_decompositions(&ms, 2, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn samples_are_feasible(seed in any::<u64>(), n in 1usize..=3, d in 3u32..=4) {
        let p = seeded_poly(seed, n, d, density_for_degree(d));
        let ms = build_matching_system(&p, Family::for_degree(d)).unwrap();
        let scale = p.max_abs_coef().max(1.0);
        let samples = sample_feasible_decompositions(&ms, 5, seed).unwrap();
        prop_assert_eq!(samples.len(), 5);
        for dec in &samples {
            let diff = &reconstruct(dec) - &p;
            prop_assert!(diff.max_abs_coef() <= 1e-9 * scale);
            for (_, b) in &dec.blocks {
                let eig = nalgebra::SymmetricEigen::new(b.q.clone()).eigenvalues.min();
                prop_assert!(eig >= -1e-9 * scale);
            }
        }
        // samples differ from the construction
        prop_assert!(samples[1..].iter().any(|s| s != &samples[0]) || n == 1);
    }

    #[test]
    fn refinement_never_worsens(seed in any::<u64>(), n in 1usize..=3) {
        let p = random_box_instance(n, 3, seed);
        let r = brute_force_min(&p, 9, 5).unwrap();
        prop_assert!(r.value <= r.grid_value);
        let x = r.argmin.unwrap();
        prop_assert!(p.bounds.contains(&x, 1e-12));
        prop_assert_eq!(r.value, p.objective.eval(&x));
    }
}
