//! Reference operator-splitting solver for programs over zero, nonnegative
//! and PSD cones.
//!
//! The iteration alternates one solve with the quasi-definite KKT matrix
//! `σI + AᵀRA` (factored once per penalty update) and a Euclidean projection
//! onto the cone, followed by a dual update. Data are equilibrated with a
//! Ruiz scheme before iterating; PSD blocks share a single row scale so the
//! projection stays Euclidean. The penalty `ρ` is rebalanced from the ratio
//! of primal to dual residuals.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::cones::{self, ConeKind, ConeSpan};
use crate::program::ConicProgram;
use crate::standard::{lower, StandardForm};
use crate::validate::{residual_report, ResidualReport};
use crate::ConicError;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Target for the relative primal, dual and gap residuals.
    pub tol: f64,
    pub max_iters: usize,
    pub time_limit: Option<Duration>,
    /// Initial penalty.
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation parameter in `(0, 2)`.
    pub alpha: f64,
    pub scaling_iters: usize,
    /// Residuals are evaluated every `check_every` iterations.
    pub check_every: usize,
    pub adaptive_rho: bool,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 100_000,
            time_limit: None,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            scaling_iters: 15,
            check_every: 10,
            adaptive_rho: true,
            verbose: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Budget exhausted with residuals within `100·tol`.
    NearOptimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration-limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a solve. `dual` is indexed like the program rows; for PSD
/// blocks it holds the lower triangle of the dual matrix.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: ResidualReport,
    pub iterations: usize,
    pub solve_time: Duration,
}

impl ConicSolution {
    pub fn value(&self, v: crate::VarId) -> f64 {
        self.primal[v.0]
    }
}

struct Scaling {
    d: Vec<f64>,
    e: Vec<f64>,
    c_scale: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn equilibrate(sf: &mut StandardForm, iters: usize) -> Scaling {
    let m = sf.a.nrows;
    let n = sf.a.ncols;
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let clamp = |x: f64| x.clamp(1e-4, 1e4);
    for _ in 0..iters {
        let mut row_norm = vec![0.0f64; m];
        let mut col_norm = vec![0.0f64; n];
        for r in 0..m {
            let (idx, val) = sf.a.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                row_norm[r] = row_norm[r].max(v.abs());
                col_norm[c] = col_norm[c].max(v.abs());
            }
        }
        // PSD rows share one factor per block
        for span in &sf.spans {
            if let ConeKind::Psd(_) = span.kind {
                let mx = row_norm[span.start..span.start + span.len]
                    .iter()
                    .fold(0.0f64, |a, &b| a.max(b));
                row_norm[span.start..span.start + span.len]
                    .iter_mut()
                    .for_each(|x| *x = mx);
            }
        }
        let dr: Vec<f64> = row_norm
            .iter()
            .map(|&x| if x == 0.0 { 1.0 } else { 1.0 / clamp(x).sqrt() })
            .collect();
        let ec: Vec<f64> = col_norm
            .iter()
            .map(|&x| if x == 0.0 { 1.0 } else { 1.0 / clamp(x).sqrt() })
            .collect();
        for r in 0..m {
            let (a, b) = (sf.a.indptr[r], sf.a.indptr[r + 1]);
            for k in a..b {
                let c = sf.a.indices[k];
                sf.a.values[k] *= dr[r] * ec[c];
            }
            sf.b[r] *= dr[r];
            d[r] *= dr[r];
        }
        for c in 0..n {
            sf.c[c] *= ec[c];
            e[c] *= ec[c];
        }
    }
    let cn = inf_norm(&sf.c);
    let c_scale = if cn > 0.0 { 1.0 / cn.clamp(1e-4, 1e4) } else { 1.0 };
    sf.c.iter_mut().for_each(|x| *x *= c_scale);
    Scaling { d, e, c_scale }
}

struct Kkt {
    chol: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
}

fn factor(sf: &StandardForm, rho: &[f64], sigma: f64) -> Result<Kkt, ConicError> {
    let n = sf.a.ncols;
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = sigma;
    }
    for r in 0..sf.a.nrows {
        let (idx, val) = sf.a.row(r);
        let w = rho[r];
        for (p, (&ci, &vi)) in idx.iter().zip(val).enumerate() {
            for (&cj, &vj) in idx[p..].iter().zip(&val[p..]) {
                let add = w * vi * vj;
                if ci == cj {
                    k[(ci, ci)] += add;
                } else {
                    k[(ci, cj)] += add;
                    k[(cj, ci)] += add;
                }
            }
        }
    }
    let chol = k
        .cholesky()
        .ok_or_else(|| ConicError::Numerical("KKT factorization failed".into()))?;
    Ok(Kkt { chol })
}

fn rho_vector(spans: &[ConeSpan], m: usize, rho: f64) -> Vec<f64> {
    let mut out = vec![rho; m];
    for s in spans {
        if s.kind == ConeKind::Zero {
            out[s.start..s.start + s.len]
                .iter_mut()
                .for_each(|x| *x = 1e3 * rho);
        }
    }
    out
}

/// Solves `prog` with the reference operator-splitting method.
pub fn solve_reference(prog: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution, ConicError> {
    let start_time = Instant::now();
    let original = lower(prog)?;
    let mut sf = original.clone();
    let n = sf.a.ncols;
    let m = sf.a.nrows;

    if m == 0 {
        // unconstrained: bounded only when the objective is constant
        let status = if sf.c.iter().all(|&x| x == 0.0) {
            SolveStatus::Optimal
        } else {
            SolveStatus::Unbounded
        };
        let primal = vec![0.0; n];
        let residuals = residual_report(prog, &primal, &[]);
        return Ok(ConicSolution {
            status,
            primal,
            dual: Vec::new(),
            primal_objective: sf.c0,
            dual_objective: sf.c0,
            residuals,
            iterations: 0,
            solve_time: start_time.elapsed(),
        });
    }

    let scaling = equilibrate(&mut sf, opts.scaling_iters);
    let spans = sf.spans.clone();

    let mut rho_base = opts.rho;
    let mut rho = rho_vector(&spans, m, rho_base);
    let mut kkt = factor(&sf, &rho, opts.sigma)?;

    let mut x = vec![0.0; n];
    let mut s = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut x_prev = x.clone();
    let mut y_prev = y.clone();

    let mut tmp_m = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];
    let mut ax = vec![0.0; m];
    let mut s_tilde = vec![0.0; m];

    let alpha = opts.alpha;
    let mut status = SolveStatus::IterationLimit;
    let mut iters = 0;
    let mut last_rel = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for it in 1..=opts.max_iters {
        iters = it;
        // x̃ = (σI + AᵀRA)⁻¹ (σx − c + Aᵀ(R(b − s) + y))
        for r in 0..m {
            tmp_m[r] = rho[r] * (sf.b[r] - s[r]) + y[r];
        }
        sf.a.mul_t(&tmp_m, &mut tmp_n);
        let mut rhs = DVector::from_iterator(
            n,
            (0..n).map(|i| opts.sigma * x[i] - sf.c[i] + tmp_n[i]),
        );
        kkt.chol.solve_mut(&mut rhs);
        sf.a.mul(rhs.as_slice(), &mut ax);
        for r in 0..m {
            s_tilde[r] = sf.b[r] - ax[r];
        }
        let check = it % opts.check_every == 0 || it == opts.max_iters;
        if check {
            x_prev.copy_from_slice(&x);
            y_prev.copy_from_slice(&y);
        }
        for i in 0..n {
            x[i] = alpha * rhs[i] + (1.0 - alpha) * x[i];
        }
        // s ← Π_K(s_rel + y/ρ), y ← y + ρ(s_rel − s)
        for r in 0..m {
            tmp_m[r] = alpha * s_tilde[r] + (1.0 - alpha) * s[r];
        }
        for span in &spans {
            let range = span.start..span.start + span.len;
            for r in range.clone() {
                s[r] = tmp_m[r] + y[r] / rho[r];
            }
            cones::project(span, &mut s[range.clone()]);
            for r in range {
                y[r] += rho[r] * (tmp_m[r] - s[r]);
            }
        }

        if !check {
            continue;
        }
        let info = convergence_info(&sf, &scaling, &x, &s, &y);
        last_rel = (info.rel_primal, info.rel_dual, info.rel_gap);
        if opts.verbose && it % (opts.check_every * 100) == 0 {
            eprintln!(
                "iter {it:6} rho {rho_base:9.2e} pres {:9.2e} dres {:9.2e} gap {:9.2e} pobj {:.10}",
                info.rel_primal, info.rel_dual, info.rel_gap, info.pobj
            );
        }
        if info.rel_primal <= opts.tol && info.rel_dual <= opts.tol && info.rel_gap <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }
        if it >= 50 {
            if primal_infeasible(&sf, &y, &y_prev, &spans) {
                status = SolveStatus::Infeasible;
                break;
            }
            if dual_infeasible(&sf, &x, &x_prev, &spans) {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if let Some(limit) = opts.time_limit {
            if start_time.elapsed() >= limit {
                break;
            }
        }
        if opts.adaptive_rho && it % (opts.check_every * 5) == 0 {
            let ratio = (info.scaled_primal_ratio / info.scaled_dual_ratio.max(1e-30)).sqrt();
            let new_rho = (rho_base * ratio).clamp(1e-6, 1e6);
            if new_rho > 5.0 * rho_base || new_rho < 0.2 * rho_base {
                rho_base = new_rho;
                rho = rho_vector(&spans, m, rho_base);
                kkt = factor(&sf, &rho, opts.sigma)?;
            }
        }
    }

    if status == SolveStatus::IterationLimit {
        let near = 100.0 * opts.tol;
        if last_rel.0 <= near && last_rel.1 <= near && last_rel.2 <= near {
            status = SolveStatus::NearOptimal;
        }
    }

    // unscale: z = E x, natural duals from y_std = −D y / c_scale
    let primal: Vec<f64> = (0..n).map(|i| scaling.e[i] * x[i]).collect();
    let y_std: Vec<f64> = (0..m)
        .map(|r| -scaling.d[r] * y[r] / scaling.c_scale)
        .collect();
    let dual: Vec<f64> = (0..m).map(|r| y_std[r] / original.row_scale[r]).collect();
    let residuals = residual_report(prog, &primal, &dual);
    Ok(ConicSolution {
        status,
        primal_objective: residuals.primal_objective,
        dual_objective: residuals.dual_objective,
        primal,
        dual,
        residuals,
        iterations: iters,
        solve_time: start_time.elapsed(),
    })
}

struct ConvergenceInfo {
    rel_primal: f64,
    rel_dual: f64,
    rel_gap: f64,
    pobj: f64,
    scaled_primal_ratio: f64,
    scaled_dual_ratio: f64,
}

fn convergence_info(sf: &StandardForm, sc: &Scaling, x: &[f64], s: &[f64], y: &[f64]) -> ConvergenceInfo {
    let m = sf.a.nrows;
    let n = sf.a.ncols;
    let mut ax = vec![0.0; m];
    sf.a.mul(x, &mut ax);
    let mut aty = vec![0.0; n];
    sf.a.mul_t(y, &mut aty);

    // scaled residual norms (for penalty balancing)
    let mut rp_s = 0.0f64;
    let mut ax_s = 0.0f64;
    let mut s_s = 0.0f64;
    let mut b_s = 0.0f64;
    // unscaled norms (for termination)
    let mut rp_u = 0.0f64;
    let mut ax_u = 0.0f64;
    let mut s_u = 0.0f64;
    let mut b_u = 0.0f64;
    let mut bty = 0.0;
    for r in 0..m {
        let rp = ax[r] + s[r] - sf.b[r];
        rp_s = rp_s.max(rp.abs());
        ax_s = ax_s.max(ax[r].abs());
        s_s = s_s.max(s[r].abs());
        b_s = b_s.max(sf.b[r].abs());
        let inv = 1.0 / sc.d[r];
        rp_u = rp_u.max((rp * inv).abs());
        ax_u = ax_u.max((ax[r] * inv).abs());
        s_u = s_u.max((s[r] * inv).abs());
        b_u = b_u.max((sf.b[r] * inv).abs());
        // y_std = −y; dual objective −bᵀy_std = bᵀy
        bty += sf.b[r] * y[r];
    }
    let mut rd_s = 0.0f64;
    let mut aty_s = 0.0f64;
    let mut c_s = 0.0f64;
    let mut rd_u = 0.0f64;
    let mut aty_u = 0.0f64;
    let mut c_u = 0.0f64;
    let mut ctx = 0.0;
    for i in 0..n {
        let rd = sf.c[i] - aty[i];
        rd_s = rd_s.max(rd.abs());
        aty_s = aty_s.max(aty[i].abs());
        c_s = c_s.max(sf.c[i].abs());
        let inv = 1.0 / (sc.e[i] * sc.c_scale);
        rd_u = rd_u.max((rd * inv).abs());
        aty_u = aty_u.max((aty[i] * inv).abs());
        c_u = c_u.max((sf.c[i] * inv).abs());
        ctx += sf.c[i] * x[i];
    }
    let pobj = ctx / sc.c_scale;
    let dobj = bty / sc.c_scale;
    let rel_primal = rp_u / (1.0 + ax_u.max(s_u).max(b_u));
    let rel_dual = rd_u / (1.0 + aty_u.max(c_u));
    let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs().max(dobj.abs()));
    ConvergenceInfo {
        rel_primal,
        rel_dual,
        rel_gap,
        pobj: pobj + sf.c0,
        scaled_primal_ratio: rp_s / ax_s.max(s_s).max(b_s).max(1e-30),
        scaled_dual_ratio: rd_s / aty_s.max(c_s).max(1e-30),
    }
}

const INFEAS_TOL: f64 = 1e-7;

/// Certificate test on the dual iterate difference: `δ = −Δy` should lie in
/// `K*` with `Aᵀδ ≈ 0` and `bᵀδ < 0`.
fn primal_infeasible(sf: &StandardForm, y: &[f64], y_prev: &[f64], spans: &[ConeSpan]) -> bool {
    let m = sf.a.nrows;
    let mut dy: Vec<f64> = (0..m).map(|r| y_prev[r] - y[r]).collect();
    let norm = inf_norm(&dy);
    if norm < 1e-10 {
        return false;
    }
    dy.iter_mut().for_each(|v| *v /= norm);
    let mut proj = dy.clone();
    for span in spans {
        cones::project_dual(span, &mut proj[span.start..span.start + span.len]);
    }
    let cone_dist = inf_norm(&dy.iter().zip(&proj).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut aty = vec![0.0; sf.a.ncols];
    sf.a.mul_t(&dy, &mut aty);
    let bty: f64 = sf.b.iter().zip(&dy).map(|(b, v)| b * v).sum();
    bty < -INFEAS_TOL.sqrt() && inf_norm(&aty) <= INFEAS_TOL.sqrt() * bty.abs() && cone_dist < 1e-4
}

/// Certificate test on the primal iterate difference: `cᵀδx < 0` and
/// `−Aδx ∈ K`.
fn dual_infeasible(sf: &StandardForm, x: &[f64], x_prev: &[f64], spans: &[ConeSpan]) -> bool {
    let n = sf.a.ncols;
    let mut dx: Vec<f64> = (0..n).map(|i| x[i] - x_prev[i]).collect();
    let norm = inf_norm(&dx);
    if norm < 1e-10 {
        return false;
    }
    dx.iter_mut().for_each(|v| *v /= norm);
    let ctx: f64 = sf.c.iter().zip(&dx).map(|(c, v)| c * v).sum();
    if ctx >= -INFEAS_TOL.sqrt() {
        return false;
    }
    let mut adx = vec![0.0; sf.a.nrows];
    sf.a.mul(&dx, &mut adx);
    let neg: Vec<f64> = adx.iter().map(|v| -v).collect();
    let mut proj = neg.clone();
    for span in spans {
        cones::project(span, &mut proj[span.start..span.start + span.len]);
    }
    let dist = inf_norm(&neg.iter().zip(&proj).map(|(a, b)| a - b).collect::<Vec<_>>());
    dist <= INFEAS_TOL.sqrt() * ctx.abs()
}
