//! Seeded random instances: coefficients uniform in `[−5, 5]`, each
//! monomial kept independently with the given density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::{monomials_of_degree, monomials_up_to, Polynomial};
use crate::problem::{Constraint, Problem};

pub const COEF_RANGE: f64 = 5.0;

/// 0.5 for degree three or less, 0.2 above.
pub fn density_for_degree(d: u32) -> f64 {
    if d <= 3 {
        0.5
    } else {
        0.2
    }
}

/// Random polynomial of degree exactly `d`; if no top-degree monomial
/// survives the draw, one is added.
pub fn random_polynomial<R: Rng>(rng: &mut R, n: usize, d: u32, density: f64) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for m in monomials_up_to(n, d) {
        if rng.random::<f64>() < density {
            p.add_term(m, rng.random_range(-COEF_RANGE..COEF_RANGE));
        }
    }
    if d > 0 && p.degree() < d {
        let top = monomials_of_degree(n, d);
        let m = top[rng.random_range(0..top.len())].clone();
        p.add_term(m, rng.random_range(-COEF_RANGE..COEF_RANGE));
    }
    p
}

/// Objective over `[0, 1]^n`.
pub fn random_box_instance(n: usize, d: u32, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Problem::unit(random_polynomial(&mut rng, n, d, density_for_degree(d)))
}

/// Objective over `[0, 1]^n` with one constraint `q(x) ≤ 0` of the same
/// degree. The constant of `q` is set so that `q = −1` at a random point
/// of the box, which keeps the instance feasible.
pub fn random_constrained_instance(n: usize, d: u32, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dens = density_for_degree(d);
    let p = random_polynomial(&mut rng, n, d, dens);
    let mut q = random_polynomial(&mut rng, n, d, dens);
    let anchor: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let shift = -1.0 - q.eval(&anchor);
    q.add_term(crate::poly::Monomial::one(n), shift);
    Problem::unit(p).with_constraint(Constraint::Polynomial(q))
}
