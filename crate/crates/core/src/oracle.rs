//! Test fixtures: grid-and-refine global minimization and sampling of
//! feasible decompositions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bestslc::{MatchingSystem, Slot};
use crate::local::refine;
use crate::poly::Polynomial;
use crate::problem::Problem;
use crate::slc::{
    construct_slc_general, convexify, required_alpha, ConvexBlock, DecompositionKind, SlcDecomposition,
};
use crate::SlcError;

pub const MAX_ORACLE_VARS: usize = 6;
const GRID_FEAS_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `+∞` when no feasible point was found.
    pub value: f64,
    pub argmin: Option<Vec<f64>>,
    pub grid_k: usize,
    /// Best feasible grid value before refinement.
    pub grid_value: f64,
    /// Whether refinement improved on the grid.
    pub refined: bool,
}

pub fn default_grid(n: usize) -> usize {
    if n <= 4 {
        21
    } else {
        9
    }
}

pub const DEFAULT_STARTS: usize = 30;

/// Evaluates the `k^n` grid over the box, keeps the best `starts` feasible
/// points and refines each by projected gradient.
pub fn brute_force_min(problem: &Problem, grid_k: usize, starts: usize) -> Result<OracleResult, SlcError> {
    let n = problem.n();
    if n > MAX_ORACLE_VARS {
        return Err(SlcError::TooManyVariables {
            n,
            limit: MAX_ORACLE_VARS,
        });
    }
    problem.bounds.check()?;
    let k = grid_k.max(1);
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let (l, u) = (problem.bounds.lower[i], problem.bounds.upper[i]);
            if k == 1 {
                vec![0.5 * (l + u)]
            } else {
                (0..k).map(|t| l + (u - l) * t as f64 / (k - 1) as f64).collect()
            }
        })
        .collect();
    let total = k.pow(n as u32);
    let mut cands: Vec<(f64, usize)> = Vec::new();
    let mut x = vec![0.0; n];
    for idx in 0..total {
        let mut r = idx;
        for i in 0..n {
            x[i] = axes[i][r % k];
            r /= k;
        }
        if problem.max_violation(&x) <= GRID_FEAS_TOL {
            cands.push((problem.objective.eval(&x), idx));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let point = |idx: usize| -> Vec<f64> {
        let mut r = idx;
        (0..n)
            .map(|i| {
                let v = axes[i][r % k];
                r /= k;
                v
            })
            .collect()
    };
    let grid_value = cands.first().map(|c| c.0).unwrap_or(f64::INFINITY);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let take = |y: Vec<f64>, v: f64, best: &mut Option<(Vec<f64>, f64)>| {
        if best.as_ref().is_none_or(|b| v < b.1) {
            *best = Some((y, v));
        }
    };
    for &(v, idx) in cands.iter() {
        let y = point(idx);
        if problem.max_violation(&y) <= FEAS_TOL {
            take(y, v, &mut best);
            break;
        }
    }
    for &(_, idx) in cands.iter().take(starts) {
        if let Some((y, v)) = refine(problem, &point(idx), FEAS_TOL) {
            take(y, v, &mut best);
        }
    }
    Ok(match best {
        Some((y, v)) => OracleResult {
            value: v,
            argmin: Some(y),
            grid_k: k,
            grid_value,
            refined: v < grid_value,
        },
        None => OracleResult {
            value: f64::INFINITY,
            argmin: None,
            grid_k: k,
            grid_value,
            refined: false,
        },
    })
}

fn kind_for(d: u32) -> DecompositionKind {
    match d {
        0..=3 => DecompositionKind::Degree3,
        4 => DecompositionKind::Degree4,
        _ => DecompositionKind::General,
    }
}

/// Polynomial whose coefficients are the system's right-hand sides.
pub fn system_polynomial(ms: &MatchingSystem) -> Polynomial {
    let mut p = Polynomial::zero(ms.n);
    for (m, &s) in ms.monomials.iter().zip(&ms.rhs) {
        p.add_term(m.clone(), s);
    }
    p
}

/// Dense row matrix over the unknowns `(block, slot)`; the unknown of an
/// off-diagonal slot is the coefficient of `x_k x_l`, i.e. `2·Q_kl`.
fn dense_rows(ms: &MatchingSystem) -> (DMatrix<f64>, Vec<(usize, Slot)>) {
    let n = ms.n;
    let mut slots = Vec::new();
    for k in 0..n {
        for l in k..n {
            slots.push(Slot::Quad(k, l));
        }
    }
    for k in 0..n {
        slots.push(Slot::Lin(k));
    }
    slots.push(Slot::Const);
    let per = slots.len();
    let cols: Vec<(usize, Slot)> = (0..ms.blocks.len())
        .flat_map(|b| slots.iter().map(move |&s| (b, s)))
        .collect();
    let mut a = DMatrix::zeros(ms.rows(), cols.len());
    for (b, entries) in ms.entries.iter().enumerate() {
        for e in entries {
            let s = slots.iter().position(|&s| s == e.slot).unwrap();
            a[(e.row, b * per + s)] += e.coef;
        }
    }
    (a, cols)
}

/// Samples decompositions that satisfy every row of `ms` with convex
/// blocks. The first sample is the construction itself; later ones add a
/// random null-space direction of growing size and re-convexify with the
/// family's cancelling shift.
pub fn sample_feasible_decompositions(
    ms: &MatchingSystem,
    count: usize,
    seed: u64,
) -> Result<Vec<SlcDecomposition>, SlcError> {
    if ms.blocks.iter().any(|b| b.descriptor.is_none()) {
        return Err(SlcError::UnsupportedConstraint(
            "sampling needs a pure product-form family".into(),
        ));
    }
    let n = ms.n;
    let p = system_polynomial(ms);
    let base = construct_slc_general(&p, ms.d.max(3))?;
    let kind = kind_for(ms.d.max(3));
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(base.clone());
    if count == 1 {
        return Ok(out);
    }
    let (a, cols) = dense_rows(ms);
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let rank_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1.0))
        .collect();
    // unknowns of the construction
    let mut raw = DVector::zeros(cols.len());
    for (ci, &(b, slot)) in cols.iter().enumerate() {
        let desc = ms.blocks[b].descriptor.as_ref().unwrap();
        let blk = base.block(desc).cloned().unwrap_or_else(|| ConvexBlock::zeros(n));
        raw[ci] = match slot {
            Slot::Quad(k, l) if k == l => blk.q[(k, k)],
            Slot::Quad(k, l) => 2.0 * blk.q[(k, l)],
            Slot::Lin(k) => blk.r[k],
            Slot::Const => blk.w,
        };
    }
    let scale = p.max_abs_coef().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 1..count {
        let g = DVector::from_fn(cols.len(), |_, _| rng.random_range(-1.0..1.0));
        let mut delta = g.clone();
        for &i in &rank_rows {
            let row = vt.row(i).transpose();
            let c = row.dot(&g);
            delta.axpy(-c, &row, 1.0);
        }
        let norm = delta.norm();
        if norm > 0.0 {
            delta *= scale * (s as f64 / count as f64) / norm;
        }
        let z = &raw + &delta;
        let mut blocks: Vec<_> = ms
            .blocks
            .iter()
            .map(|b| (b.descriptor.clone().unwrap(), ConvexBlock::zeros(n)))
            .collect();
        for (ci, &(b, slot)) in cols.iter().enumerate() {
            let blk = &mut blocks[b].1;
            match slot {
                Slot::Quad(k, l) if k == l => blk.q[(k, k)] = z[ci],
                Slot::Quad(k, l) => {
                    blk.q[(k, l)] = 0.5 * z[ci];
                    blk.q[(l, k)] = 0.5 * z[ci];
                }
                Slot::Lin(k) => blk.r[k] = z[ci],
                Slot::Const => blk.w = z[ci],
            }
        }
        let alpha = required_alpha(kind, ms.d.max(3), &blocks);
        out.push(convexify(n, ms.d.max(3), kind, blocks, alpha));
    }
    Ok(out)
}
