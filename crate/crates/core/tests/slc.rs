mod common;

use common::{coef_diff, poly, seeded_point, seeded_poly};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slcpop_core::poly::Polynomial;
use slcpop_core::random::density_for_degree;
use slcpop_core::slc::*;
use slcpop_core::SlcError;

fn min_eig(q: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(q.clone()).eigenvalues.min()
}

#[test]
fn gershgorin_examples() {
    let q = DMatrix::from_row_slice(2, 2, &[1.0, -3.0, -3.0, 2.0]);
    let a = gershgorin_alpha(&q);
    assert_eq!(a, 2.0);
    assert!(min_eig(&(q + DMatrix::identity(2, 2) * a)) >= -1e-12);
    assert_eq!(gershgorin_alpha(&DMatrix::identity(3, 3)), 0.0);
    assert_eq!(gershgorin_alpha(&DMatrix::zeros(3, 3)), 0.0);
}

#[test]
fn cube_in_one_variable() {
    let p = poly(1, &[(&[3], 1.0)]);
    let dec = construct_slc_degree3(&p).unwrap();
    assert_eq!(dec.alpha, 0.0);
    let b = dec.block(&Descriptor::x(0)).unwrap();
    assert_eq!(b.q[(0, 0)], 1.0);
    assert_eq!(b.r[0], 0.0);
    assert_eq!(b.w, 0.0);
    for (d, blk) in &dec.blocks {
        if *d != Descriptor::x(0) {
            assert!(blk.to_polynomial().is_zero(), "block {d} not zero");
        }
    }
}

#[test]
fn two_variable_cubic_placement() {
    // p3 = a1 x1³ + a2 x2³ + a3 x1²x2 + a4 x1x2² + a5 x1² + a6 x2² + a7 x1x2 + a8 x1 + a9 x2
    let a = [0.0, 1.5, -2.0, 3.0, 0.5, -1.0, 2.5, 4.0, -0.7, 1.1];
    let p = poly(
        2,
        &[
            (&[3, 0], a[1]),
            (&[0, 3], a[2]),
            (&[2, 1], a[3]),
            (&[1, 2], a[4]),
            (&[2, 0], a[5]),
            (&[0, 2], a[6]),
            (&[1, 1], a[7]),
            (&[1, 0], a[8]),
            (&[0, 1], a[9]),
        ],
    );
    let raw = place_terms(&p, 3);
    let get = |d: Descriptor| raw.iter().find(|(k, _)| *k == d).unwrap().1.clone();
    let p1 = get(Descriptor::x(0));
    let p2 = get(Descriptor::x(1));
    assert_eq!(p1.q[(0, 0)], a[1]);
    assert_eq!(p1.q[(0, 1)], a[3] / 2.0);
    assert_eq!(p1.q[(1, 1)], a[4]);
    assert_eq!(p2.q[(1, 1)], a[2]);
    assert_eq!(p1.r, DVector::from_vec(vec![a[5], a[7]]));
    assert_eq!(p2.r[1], a[6]);
    assert_eq!(p1.w, a[8]);
    assert_eq!(p2.w, a[9]);
}

#[test]
fn zero_polynomial_gives_zero_decompositions() {
    for d in 3..=6 {
        let dec = construct_slc_general(&Polynomial::zero(2), d).unwrap();
        assert_eq!(dec.alpha, 0.0);
        assert!(reconstruct(&dec).is_zero());
        assert!(dec.blocks.iter().all(|(_, b)| b.to_polynomial().is_zero()));
    }
}

#[test]
fn quartic_examples() {
    let p = poly(1, &[(&[4], 1.0)]);
    let dec = construct_slc_degree4(&p).unwrap();
    let b = dec.block(&Descriptor::new(vec![0, 0], vec![])).unwrap();
    assert_eq!(b.q[(0, 0)], 1.0);
    assert_eq!(dec.alpha, 0.0);
    assert!(coef_diff(&reconstruct(&dec), &p) < 1e-15);

    let p = poly(2, &[(&[2, 2], 1.0)]);
    let dec = construct_slc_degree4(&p).unwrap();
    let b = dec.block(&Descriptor::new(vec![0, 0], vec![])).unwrap();
    assert_eq!(b.q[(1, 1)], 1.0);
}

#[test]
fn quartic_linear_correction_uses_family_constant() {
    let p = poly(2, &[(&[2, 1, 1], -3.0), (&[1, 1, 0], 2.0)].map(|(e, c)| (e, c)).as_slice().iter().map(|&(e, c)| (&e[..2], c)).collect::<Vec<_>>());
    let dec = construct_slc_degree4(&p).unwrap();
    assert!(dec.alpha > 0.0);
    let raw = place_terms(&p, 4);
    let n = 2.0;
    let k = 1.0 + n + n * (n + 1.0) / 2.0;
    for i in 0..2 {
        let before = raw.iter().find(|(d, _)| *d == Descriptor::x(i)).unwrap().1.r[i];
        let after = dec.block(&Descriptor::x(i)).unwrap().r[i];
        assert!((before - after - k * dec.alpha).abs() < 1e-12);
    }
}

#[test]
fn quintic_placement() {
    let p = poly(5, &[(&[1, 1, 1, 1, 1], 1.0)]);
    let dec = construct_slc_general(&p, 5).unwrap();
    let raw = place_terms(&p, 5);
    let b = &raw.iter().find(|(d, _)| *d == Descriptor::new(vec![0, 1, 2], vec![])).unwrap().1;
    assert_eq!(b.q[(3, 4)], 0.5);
    assert_eq!(b.q[(4, 3)], 0.5);
    assert!(coef_diff(&reconstruct(&dec), &p) < 1e-12);
}

#[test]
fn degree_three_delegates() {
    let p = seeded_poly(11, 3, 3, 0.5);
    assert_eq!(construct_slc_general(&p, 3).unwrap(), construct_slc_degree3(&p).unwrap());
    let q = seeded_poly(12, 3, 4, 0.2);
    assert_eq!(construct_slc_general(&q, 4).unwrap(), construct_slc_degree4(&q).unwrap());
}

#[test]
fn constructor_errors() {
    let p4 = poly(1, &[(&[4], 1.0)]);
    assert!(matches!(construct_slc_degree3(&p4), Err(SlcError::UnsupportedDegree { degree: 4, .. })));
    let p5 = poly(1, &[(&[5], 1.0)]);
    assert!(construct_slc_degree4(&p5).is_err());
    assert!(matches!(construct_slc_general(&p5, 7), Err(SlcError::DegreeCap { degree: 7, cap: 6 })));
    assert!(construct_slc_general(&p5, 4).is_err());
    let p2 = poly(1, &[(&[2], 1.0)]);
    assert!(construct_slc_first_type(&p2).is_err());
}

#[test]
fn first_type_examples() {
    let p = poly(1, &[(&[3], 1.0)]);
    let dec = construct_slc_first_type(&p).unwrap();
    let b = dec.block(&Descriptor::x(0)).unwrap();
    assert_eq!(b.to_polynomial(), poly(1, &[(&[2], 1.0)]));
    let d3 = construct_slc_degree3(&p).unwrap();
    assert_eq!(b.to_polynomial(), d3.block(&Descriptor::x(0)).unwrap().to_polynomial());

    // block 1.5 x1² x2 − 2 x1 x2: H12 = 3x1 − 2, H11 = 3x2, H22 = 0
    let mut blk = ConvexBlock::zeros(2);
    blk.add_polynomial(&poly(2, &[(&[2, 1], 1.5), (&[1, 1], -2.0)]));
    assert_eq!(first_type_hessian_bound(&blk), 5.0);
}

#[test]
fn reconstruct_examples() {
    let empty = SlcDecomposition {
        n: 2,
        d: 3,
        kind: DecompositionKind::Degree3,
        blocks: vec![],
        alpha: 0.0,
    };
    assert!(reconstruct(&empty).is_zero());
    let q = poly(2, &[(&[2, 0], 1.0), (&[0, 1], -2.0), (&[0, 0], 0.5)]);
    let mut blk = ConvexBlock::zeros(2);
    blk.add_polynomial(&q);
    let single = SlcDecomposition {
        n: 2,
        d: 3,
        kind: DecompositionKind::Degree3,
        blocks: vec![(Descriptor::one(), blk)],
        alpha: 0.0,
    };
    assert!(coef_diff(&reconstruct(&single), &q) < 1e-15);
}

#[test]
fn family_weights_sum_to_a_constant() {
    for (kind, d) in [
        (DecompositionKind::Degree3, 3),
        (DecompositionKind::Degree4, 4),
        (DecompositionKind::General, 5),
        (DecompositionKind::General, 6),
    ] {
        for n in 1..=3 {
            let mut sum = Polynomial::zero(n);
            for desc in family_descriptors(n, d) {
                let w = convexification_weight(kind, d, &desc);
                sum = &sum + &desc.factor(n).scale(w);
            }
            let pruned = sum.pruned(1e-12);
            assert!(pruned.degree() == 0, "kind {kind:?} d {d} n {n}: {pruned}");
        }
    }
    // 1 + n + n(n+1)/2 for the quartic family
    let n = 3usize;
    let k: f64 = family_descriptors(n, 4)
        .iter()
        .filter(|d| d.i.is_empty())
        .map(|d| convexification_weight(DecompositionKind::Degree4, 4, d))
        .sum();
    assert_eq!(k, 1.0 + 3.0 + 6.0);
}

fn check_decomposition(p: &Polynomial, dec: &SlcDecomposition, seed: u64) -> Result<(), TestCaseError> {
    let scale = p.max_abs_coef().max(1.0);
    prop_assert!(coef_diff(&reconstruct(dec), p) <= 1e-9 * scale);
    for (desc, b) in &dec.blocks {
        prop_assert!(b.is_dominant(1e-9 * scale), "block {} margin {}", desc, b.dominance_margin());
        if b.is_quadratic() {
            prop_assert!(min_eig(&b.q) >= -1e-9 * scale);
        }
    }
    for s in 0..20 {
        let x = seeded_point(seed.wrapping_add(s), p.n());
        prop_assert!((p.eval(&x) - dec.evaluate(&x)).abs() <= 1e-8 * scale);
    }
    Ok(())
}

fn check_alpha_minimal(dec: &SlcDecomposition, raw: Vec<(Descriptor, ConvexBlock)>) -> Result<(), TestCaseError> {
    if dec.alpha <= 1e-3 {
        return Ok(());
    }
    let smaller = if dec.kind == DecompositionKind::FirstType {
        convexify_first_type(dec.n, dec.d, raw, dec.alpha - 1e-3)
    } else {
        convexify(dec.n, dec.d, dec.kind, raw, dec.alpha - 1e-3)
    };
    prop_assert!(smaller.blocks.iter().any(|(_, b)| !b.is_dominant(0.0)));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_form_identity(seed in any::<u64>(), n in 1usize..=5, d in 3u32..=5) {
        let p = seeded_poly(seed, n, d, density_for_degree(d));
        let dec = construct_slc_general(&p, d).unwrap();
        check_decomposition(&p, &dec, seed)?;
        check_alpha_minimal(&dec, place_terms(&p, d))?;
    }

    #[test]
    fn degree_six_identity(seed in any::<u64>(), n in 1usize..=3) {
        let p = seeded_poly(seed, n, 6, 0.2);
        let dec = construct_slc_general(&p, 6).unwrap();
        check_decomposition(&p, &dec, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn first_type_identity(seed in any::<u64>(), n in 1usize..=4, d in 3u32..=4) {
        let p = seeded_poly(seed, n, d, density_for_degree(d));
        let dec = construct_slc_first_type(&p).unwrap();
        prop_assert!(dec.blocks.iter().all(|(desc, _)| desc.level() == 1));
        check_decomposition(&p, &dec, seed)?;
        check_alpha_minimal(&dec, place_terms_first_type(&p))?;
    }
}
