//! Local minimization on a box: projected gradient with backtracking, a
//! quadratic penalty continuation for constraints, and a final
//! feasibility restoration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::BoxDomain;
use crate::problem::Problem;

const MAX_ITERS: usize = 3000;
const PENALTIES: [f64; 6] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

/// Minimizes `fun` over `bounds` from `x`.
pub fn projected_gradient<F>(fun: F, bounds: &BoxDomain, x0: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let (mut f, mut g) = fun(&x);
    let mut t = 1.0;
    for _ in 0..MAX_ITERS {
        let mut accepted = None;
        while t > 1e-20 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            bounds.project(&mut y);
            let (fy, gy) = fun(&y);
            let mut lin = 0.0;
            let mut sq = 0.0;
            for k in 0..x.len() {
                let dk = y[k] - x[k];
                lin += g[k] * dk;
                sq += dk * dk;
            }
            if fy <= f + lin + sq / (2.0 * t) {
                accepted = Some((y, fy, gy, sq));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy, gy, sq)) = accepted else {
            break;
        };
        let done = sq.sqrt() <= 1e-13 || (f - fy).abs() <= 1e-16 * (1.0 + f.abs());
        x = y;
        f = fy;
        g = gy;
        if done {
            break;
        }
        t *= 2.0;
    }
    x
}

/// Local minimum of the problem's objective from `x0`, returned only if it
/// satisfies every constraint within `feas_tol`.
pub fn refine(problem: &Problem, x0: &[f64], feas_tol: f64) -> Option<(Vec<f64>, f64)> {
    let obj = |x: &[f64]| (problem.objective.eval(x), problem.objective.grad(x));
    let mut x = if problem.constraints.is_empty() {
        projected_gradient(obj, &problem.bounds, x0)
    } else {
        let mut x = x0.to_vec();
        for rho in PENALTIES {
            let pen = |y: &[f64]| {
                let (mut f, mut g) = obj(y);
                for c in &problem.constraints {
                    let (v, gc) = c.value_grad(y);
                    if v > 0.0 {
                        f += rho * v * v;
                        for (gk, gck) in g.iter_mut().zip(&gc) {
                            *gk += 2.0 * rho * v * gck;
                        }
                    }
                }
                (f, g)
            };
            x = projected_gradient(pen, &problem.bounds, &x);
        }
        x
    };
    restore(problem, &mut x, feas_tol);
    if problem.max_violation(&x) <= feas_tol {
        let v = problem.objective.eval(&x);
        Some((x, v))
    } else {
        None
    }
}

/// Newton steps on the most violated constraint until all are within
/// `tol`.
fn restore(problem: &Problem, x: &mut [f64], tol: f64) {
    for _ in 0..100 {
        let mut worst = None;
        let mut worst_v = tol * 0.1;
        for c in &problem.constraints {
            let (v, g) = c.value_grad(x);
            if v > worst_v {
                worst_v = v;
                worst = Some(g);
            }
        }
        let Some(g) = worst else {
            return;
        };
        // only free coordinates can move
        let gg: f64 = g
            .iter()
            .enumerate()
            .filter(|&(k, gk)| {
                let at_low = x[k] <= problem.bounds.lower[k] && *gk > 0.0;
                let at_up = x[k] >= problem.bounds.upper[k] && *gk < 0.0;
                !(at_low || at_up)
            })
            .map(|(_, gk)| gk * gk)
            .sum();
        if gg <= 1e-30 {
            return;
        }
        let step = 1.1 * worst_v / gg;
        for (xk, gk) in x.iter_mut().zip(&g) {
            *xk -= step * gk;
        }
        problem.bounds.project(x);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    /// Best feasible point found, if any.
    pub x: Option<Vec<f64>>,
    /// Objective at `x`, `+∞` when none was found.
    pub value: f64,
}

impl LocalResult {
    pub fn feasible(&self) -> bool {
        self.x.is_some()
    }
}

/// Feasibility tolerance for incumbents.
pub const INCUMBENT_TOL: f64 = 1e-8;

/// Multistart local search from `x0` plus `starts` uniform random points.
pub fn local_search_upper_bound(problem: &Problem, x0: &[f64], starts: usize, seed: u64) -> LocalResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = LocalResult {
        x: None,
        value: f64::INFINITY,
    };
    let n = problem.n();
    let try_from = |x: &[f64], best: &mut LocalResult| {
        if let Some((y, v)) = refine(problem, x, INCUMBENT_TOL) {
            if v < best.value {
                best.value = v;
                best.x = Some(y);
            }
        }
    };
    try_from(x0, &mut best);
    for _ in 0..starts {
        let x: Vec<f64> = (0..n)
            .map(|k| rng.random_range(problem.bounds.lower[k]..=problem.bounds.upper[k]))
            .collect();
        try_from(&x, &mut best);
    }
    best
}
