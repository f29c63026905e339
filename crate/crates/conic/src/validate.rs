//! Independent recomputation of solution quality.
//!
//! Dual values follow the row layout of the program. For a PSD block the
//! dual entries are the lower triangle of a symmetric matrix `W`, paired
//! with the primal matrix through the trace inner product, so off-diagonal
//! entries carry weight 2 in the Lagrangian.

use crate::cones::min_eigenvalue;
use crate::program::{Cone, ConeBlock, ConicProgram};
use crate::solver::ConicSolution;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    /// `max |row|` over zero-cone rows.
    pub equality_residual: f64,
    /// Largest cone violation of the primal rows (nonnegative rows, the
    /// negated smallest eigenvalue of PSD blocks, exponential-cone gaps).
    pub cone_violation: f64,
    /// `‖c − Σ w_r a_r‖∞`.
    pub dual_residual: f64,
    /// Largest violation of the dual cone by the dual values.
    pub dual_cone_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal − dual|`.
    pub gap: f64,
}

impl ResidualReport {
    pub fn primal_residual(&self) -> f64 {
        self.equality_residual.max(self.cone_violation)
    }

    pub fn max_residual(&self) -> f64 {
        self.primal_residual()
            .max(self.dual_residual)
            .max(self.dual_cone_violation)
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal_objective.abs().max(self.dual_objective.abs()))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.primal_residual() <= tol
            && self.dual_residual <= tol
            && self.dual_cone_violation <= tol
            && self.relative_gap() <= tol
    }
}

fn tril_matrix(k: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            m[(i, j)] = v[idx];
            m[(j, i)] = v[idx];
            idx += 1;
        }
    }
    m
}

/// Dual weights as they enter the Lagrangian (`2·W_ij` off the diagonal).
fn lagrangian_weights(block: &ConeBlock, dual: &[f64]) -> Vec<f64> {
    match block.cone {
        Cone::Psd(k) => {
            let mut out = dual.to_vec();
            let mut idx = 0;
            for j in 0..k {
                for i in j..k {
                    if i != j {
                        out[idx] *= 2.0;
                    }
                    idx += 1;
                }
            }
            out
        }
        _ => dual.to_vec(),
    }
}

fn exp_violation(t: f64, s: f64, r: f64) -> f64 {
    if s > 0.0 {
        (s * (r / s).exp() - t).max(0.0)
    } else {
        // closure: s = 0 requires r ≤ 0 and t ≥ 0
        (-s).max(0.0).max(r.max(0.0)).max((-t).max(0.0))
    }
}

fn exp_dual_violation(u: f64, v: f64, w: f64) -> f64 {
    // K* = {(u, v, w): w < 0, −w·exp(v/w) ≤ e·u} ∪ {(u, v, 0): u, v ≥ 0}
    if w < 0.0 {
        (-w * (v / w).exp() - std::f64::consts::E * u).max(0.0)
    } else {
        w.max(0.0).max((-u).max(0.0)).max((-v).max(0.0))
    }
}

/// Recomputes all residuals of `(primal, dual)` against `prog`. An empty
/// `dual` skips the dual-side checks.
pub fn residual_report(prog: &ConicProgram, primal: &[f64], dual: &[f64]) -> ResidualReport {
    let mut rep = ResidualReport {
        primal_objective: prog.objective().eval(primal),
        ..Default::default()
    };
    let have_dual = dual.len() == prog.num_rows();
    let mut stat: Vec<f64> = vec![0.0; prog.num_vars()];
    for &(v, c) in &prog.objective().terms {
        stat[v.0] += c;
    }
    let mut dual_obj = prog.objective().constant;
    let mut offset = 0;
    for (bi, block) in prog.blocks().iter().enumerate() {
        let vals = prog.eval_block(bi, primal);
        let len = vals.len();
        match block.cone {
            Cone::Zero => {
                for v in &vals {
                    rep.equality_residual = rep.equality_residual.max(v.abs());
                }
            }
            Cone::NonNeg => {
                for v in &vals {
                    rep.cone_violation = rep.cone_violation.max(-v);
                }
            }
            Cone::Psd(k) => {
                let lam = min_eigenvalue(&tril_matrix(k, &vals));
                rep.cone_violation = rep.cone_violation.max(-lam);
            }
            Cone::Exp => {
                rep.cone_violation = rep
                    .cone_violation
                    .max(exp_violation(vals[0], vals[1], vals[2]));
            }
        }
        if have_dual {
            let d = &dual[offset..offset + len];
            match block.cone {
                Cone::Zero => {}
                Cone::NonNeg => {
                    for v in d {
                        rep.dual_cone_violation = rep.dual_cone_violation.max(-v);
                    }
                }
                Cone::Psd(k) => {
                    let lam = min_eigenvalue(&tril_matrix(k, d));
                    rep.dual_cone_violation = rep.dual_cone_violation.max(-lam);
                }
                Cone::Exp => {
                    rep.dual_cone_violation = rep
                        .dual_cone_violation
                        .max(exp_dual_violation(d[0], d[1], d[2]));
                }
            }
            let w = lagrangian_weights(block, d);
            for (row, &wr) in block.rows.iter().zip(&w) {
                if wr == 0.0 {
                    continue;
                }
                for &(v, c) in &row.terms {
                    stat[v.0] -= wr * c;
                }
                dual_obj -= wr * row.constant;
            }
        }
        offset += len;
    }
    rep.cone_violation = rep.cone_violation.max(0.0);
    rep.dual_cone_violation = rep.dual_cone_violation.max(0.0);
    if have_dual {
        rep.dual_residual = stat.iter().fold(0.0, |m, x| m.max(x.abs()));
        rep.dual_objective = dual_obj;
    } else {
        rep.dual_objective = rep.primal_objective;
    }
    rep.gap = (rep.primal_objective - rep.dual_objective).abs();
    rep
}

/// Recomputes residuals for a solver result. `tol` only affects the
/// returned pass flag.
pub fn validate_solution(prog: &ConicProgram, sol: &ConicSolution, tol: f64) -> (ResidualReport, bool) {
    let rep = residual_report(prog, &sol.primal, &sol.dual);
    let ok = rep.passes(tol);
    (rep, ok)
}

/// Lower bound on the optimal value that holds for an inexact dual. The
/// dual is projected onto the dual cone and the leftover stationarity
/// residual is charged against `|z_v| ≤ var_bound[v]`, which must hold on
/// the feasible set. Returns `-∞` if the dual has the wrong length.
pub fn certified_lower_bound(prog: &ConicProgram, dual: &[f64], var_bound: &[f64]) -> f64 {
    if dual.len() != prog.num_rows() || var_bound.len() != prog.num_vars() {
        return f64::NEG_INFINITY;
    }
    let mut stat: Vec<f64> = vec![0.0; prog.num_vars()];
    for &(v, c) in &prog.objective().terms {
        stat[v.0] += c;
    }
    let mut bound = prog.objective().constant;
    let mut offset = 0;
    for block in prog.blocks() {
        let len = block.rows.len();
        let mut d = dual[offset..offset + len].to_vec();
        offset += len;
        match block.cone {
            Cone::Zero => {}
            Cone::NonNeg => d.iter_mut().for_each(|x| *x = x.max(0.0)),
            Cone::Psd(k) => {
                let m = tril_matrix(k, &d);
                let eig = nalgebra::SymmetricEigen::new(m);
                let lam = eig.eigenvalues.map(|l| l.max(0.0));
                let p = &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose();
                let mut idx = 0;
                for j in 0..k {
                    for i in j..k {
                        d[idx] = p[(i, j)];
                        idx += 1;
                    }
                }
            }
            Cone::Exp => d.iter_mut().for_each(|x| *x = 0.0),
        }
        let w = lagrangian_weights(block, &d);
        for (row, &wr) in block.rows.iter().zip(&w) {
            if wr == 0.0 {
                continue;
            }
            for &(v, c) in &row.terms {
                stat[v.0] -= wr * c;
            }
            bound -= wr * row.constant;
        }
    }
    for (s, b) in stat.iter().zip(var_bound) {
        if *s != 0.0 {
            bound -= s.abs() * b;
        }
    }
    bound
}
