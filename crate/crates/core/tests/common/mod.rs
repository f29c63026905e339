#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slcpop_core::poly::{Monomial, Polynomial};
use slcpop_core::random::random_polynomial;

pub fn poly(n: usize, terms: &[(&[u32], f64)]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
}

pub fn seeded_poly(seed: u64, n: usize, d: u32, density: f64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_polynomial(&mut rng, n, d, density)
}

pub fn seeded_point(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Largest coefficient difference, independent of the library's
/// subtraction.
pub fn coef_diff(a: &Polynomial, b: &Polynomial) -> f64 {
    let mut keys: Vec<Monomial> = a.terms().map(|(m, _)| m.clone()).collect();
    keys.extend(b.terms().map(|(m, _)| m.clone()));
    keys.iter()
        .map(|m| (a.coefficient(m) - b.coefficient(m)).abs())
        .fold(0.0, f64::max)
}

/// Direct evaluation from the exponent lists.
pub fn eval_naive(p: &Polynomial, x: &[f64]) -> f64 {
    p.terms()
        .map(|(m, c)| {
            c * m
                .exponents()
                .iter()
                .zip(x)
                .map(|(&e, &xi)| (0..e).fold(1.0, |acc, _| acc * xi))
                .product::<f64>()
        })
        .sum()
}
