//! Coefficient matching and the conic programs whose optimal value is the
//! best SLC lower bound.
//!
//! For every block `D` of the family the program carries a free symmetric
//! `Y^D`, the stationarity LMI `−(Y^D + Σ_j λ_j A_j^D) ⪰ 0`, the
//! equalities `z_D + Σ_j λ_j c_j^D = 0`, `t_D + Σ_j λ_j μ_j^D = 0` with
//! `z_D = L(f_D·x)`, `t_D = L(f_D)`, and the Schur LMI
//! `[[Y^D, z_D], [z_Dᵀ, t_D]] ⪰ 0`. The objective is `min −Σ_j λ_j s_j`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use slcpop_conic::{
    certified_lower_bound, solve_reference, ConicProgram, ConicSolution, LinExpr, SolveStatus, SolverOptions,
    VarId,
};

use crate::poly::{monomials_up_to, Monomial, Polynomial, MAX_DEGREE};
use crate::problem::{Constraint, Problem};
use crate::rpt::{generate_lifted_region, LiftedRegion, LiftedSpace, RegionOptions, RowKind};
use crate::slc::{family_descriptors, Descriptor, SlcDecomposition};
use crate::SlcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Degree3,
    Degree4,
    General(u32),
}

impl Family {
    /// Family for polynomials of degree `d` (at least three).
    pub fn for_degree(d: u32) -> Family {
        match d {
            0..=3 => Family::Degree3,
            4 => Family::Degree4,
            _ => Family::General(d),
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            Family::Degree3 => 3,
            Family::Degree4 => 4,
            Family::General(d) => d,
        }
    }
}

/// One block slot of the family: the nonnegative factor and its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBlock {
    pub descriptor: Option<Descriptor>,
    pub factor: Polynomial,
    pub label: String,
}

/// Unknown of a block: `Q_kl` (`k ≤ l`), `r_k` or `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Quad(usize, usize),
    Lin(usize),
    Const,
}

/// Coefficient of monomial `row` in `f_D` times the slot monomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry {
    pub row: usize,
    pub slot: Slot,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingSystem {
    pub n: usize,
    pub d: u32,
    /// One row per monomial of degree `≤ d`.
    pub monomials: Vec<Monomial>,
    pub rhs: Vec<f64>,
    pub blocks: Vec<FamilyBlock>,
    pub entries: Vec<Vec<BlockEntry>>,
}

impl MatchingSystem {
    pub fn rows(&self) -> usize {
        self.monomials.len()
    }

    /// Left-hand side of every row for the given per-block unknowns.
    /// `Q` is symmetric; the entry `Q_kl`, `k < l`, enters twice.
    pub fn apply(&self, blocks: &[(DMatrix<f64>, DVector<f64>, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (entries, (q, r, w)) in self.entries.iter().zip(blocks) {
            for e in entries {
                let v = match e.slot {
                    Slot::Quad(k, l) if k == l => q[(k, k)],
                    Slot::Quad(k, l) => q[(k, l)] + q[(l, k)],
                    Slot::Lin(k) => r[k],
                    Slot::Const => *w,
                };
                out[e.row] += e.coef * v;
            }
        }
        out
    }

    /// Row residuals of a product-form decomposition over this family.
    /// Blocks missing from `dec` count as zero; blocks of `dec` outside the
    /// family are an error.
    pub fn residual(&self, dec: &SlcDecomposition) -> Result<Vec<f64>, SlcError> {
        let n = self.n;
        let mut unknowns = vec![(DMatrix::zeros(n, n), DVector::zeros(n), 0.0); self.blocks.len()];
        for (desc, b) in &dec.blocks {
            if !b.is_quadratic() {
                return Err(SlcError::UnsupportedDegree {
                    degree: b.higher.degree(),
                    what: "coefficient matching",
                });
            }
            let at = self
                .blocks
                .iter()
                .position(|fb| fb.descriptor.as_ref() == Some(desc))
                .ok_or_else(|| SlcError::UnsupportedConstraint(format!("block {desc} is outside the family")))?;
            unknowns[at] = (b.q.clone(), b.r.clone(), b.w);
        }
        let lhs = self.apply(&unknowns);
        Ok(lhs.iter().zip(&self.rhs).map(|(a, s)| a - s).collect())
    }
}

fn family_blocks(n: usize, d: u32, extra: &[Polynomial]) -> Vec<FamilyBlock> {
    let mut out: Vec<FamilyBlock> = family_descriptors(n, d)
        .into_iter()
        .map(|desc| FamilyBlock {
            factor: desc.factor(n),
            label: desc.to_string(),
            descriptor: Some(desc),
        })
        .collect();
    for (k, f) in extra.iter().enumerate() {
        out.push(FamilyBlock {
            descriptor: None,
            factor: f.clone(),
            label: format!("extra{}", k + 1),
        });
    }
    out
}

fn matching_for_blocks(p: &Polynomial, d: u32, blocks: Vec<FamilyBlock>) -> Result<MatchingSystem, SlcError> {
    let n = p.n();
    let monomials = monomials_up_to(n, d);
    let index: HashMap<&Monomial, usize> = monomials.iter().enumerate().map(|(k, m)| (m, k)).collect();
    let rhs = monomials.iter().map(|m| p.coefficient(m)).collect();
    let mut slots = Vec::new();
    for k in 0..n {
        for l in k..n {
            slots.push((Slot::Quad(k, l), Monomial::from_indices(n, &[k, l])));
        }
    }
    for k in 0..n {
        slots.push((Slot::Lin(k), Monomial::var(n, k)));
    }
    slots.push((Slot::Const, Monomial::one(n)));
    let mut entries = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let mut es = Vec::new();
        for (slot, m) in &slots {
            for (mu, c) in b.factor.mul_monomial(m, 1.0).terms() {
                let row = *index.get(mu).ok_or(SlcError::UnsupportedDegree {
                    degree: mu.degree(),
                    what: "the matching system of this family",
                })?;
                es.push(BlockEntry { row, slot: *slot, coef: c });
            }
        }
        entries.push(es);
    }
    let system = MatchingSystem {
        n,
        d,
        monomials: monomials.clone(),
        rhs,
        blocks,
        entries,
    };
    Ok(system)
}

/// Per-monomial equalities `Σ_D coef(f_D·block_D) = coef(p)` for the
/// product-form family.
pub fn build_matching_system(p: &Polynomial, family: Family) -> Result<MatchingSystem, SlcError> {
    let d = family.degree();
    if d > MAX_DEGREE {
        return Err(SlcError::DegreeCap { degree: d, cap: MAX_DEGREE });
    }
    if p.degree() > d {
        return Err(SlcError::UnsupportedDegree {
            degree: p.degree(),
            what: "this decomposition family",
        });
    }
    matching_for_blocks(p, d, family_blocks(p.n(), d, &[]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Convexity through PSD blocks.
    BestSlc,
    /// Convexity through diagonal dominance, degree 3 only.
    Gershgorin,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelOptions {
    /// Additional nonnegative factors (typically redundant linear
    /// constraints `b − aᵀx`) that enlarge the family.
    pub extra_factors: Vec<Polynomial>,
}

/// Variables of the dual side for one polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPart {
    pub system: MatchingSystem,
    pub lambda: Vec<VarId>,
    /// Per block, the symmetric `Y^D` as a full matrix of handles.
    pub y: Vec<Vec<Vec<VarId>>>,
    /// Per block, `(θ^c, θ^a, θ^b)` of the dominance variant.
    pub theta: Vec<(Vec<VarId>, Vec<VarId>, Vec<VarId>)>,
}

impl DualPart {
    /// `−Σ λ_j s_j` at `z`.
    pub fn value(&self, z: &[f64]) -> f64 {
        -self
            .lambda
            .iter()
            .zip(&self.system.rhs)
            .map(|(l, s)| z[l.0] * s)
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    pub program: ConicProgram,
    pub n: usize,
    pub d: u32,
    pub variant: Variant,
    pub space: LiftedSpace,
    /// One handle per lifted monomial, in `space` order.
    pub lifted: Vec<VarId>,
    pub objective: DualPart,
    pub constraints: Vec<DualPart>,
    /// Bound on `|z_v|` over the feasible set, used by the certificate.
    pub var_bounds: Vec<f64>,
}

impl DualModel {
    pub fn x_var(&self, i: usize) -> VarId {
        self.lifted[self.space.x(i)]
    }

    pub fn max_psd_dim(&self) -> usize {
        self.program.psd_dims().into_iter().max().unwrap_or(0)
    }
}

struct Builder<'a> {
    prog: ConicProgram,
    space: &'a LiftedSpace,
    lifted: Vec<VarId>,
    bounds: Vec<f64>,
}

impl Builder<'_> {
    fn var(&mut self, name: String, bound: f64) -> VarId {
        let v = self.prog.add_var(name);
        self.bounds.push(bound);
        v
    }

    fn sym(&mut self, prefix: &str, n: usize, bound: f64) -> Vec<Vec<VarId>> {
        let mut m = vec![vec![VarId(0); n]; n];
        for l in 0..n {
            for k in l..n {
                let v = self.var(format!("{prefix}[{},{}]", k + 1, l + 1), bound);
                m[k][l] = v;
                m[l][k] = v;
            }
        }
        m
    }

    fn lin(&self, p: &Polynomial) -> Result<LinExpr, SlcError> {
        let (c, coeffs) = self.space.linearize(p)?;
        let mut e = LinExpr::constant(c);
        for (k, a) in coeffs {
            e.add_term(self.lifted[k], a);
        }
        Ok(e)
    }

    fn region(&mut self, region: &LiftedRegion) -> Result<(), SlcError> {
        let mut nonneg = Vec::new();
        let mut zero = Vec::new();
        for row in &region.rows {
            let mut e = LinExpr::constant(row.constant);
            for &(k, a) in &row.coeffs {
                e.add_term(self.lifted[k], a);
            }
            match row.kind {
                RowKind::NonNegative => nonneg.push(e),
                RowKind::Zero => zero.push(e),
            }
        }
        if !nonneg.is_empty() {
            self.prog.add_nonneg("region", nonneg);
        }
        if !zero.is_empty() {
            self.prog.add_zero("region_eq", zero);
        }
        let n = self.space.n();
        for (ci, c) in region.convex.iter().enumerate() {
            match c {
                Constraint::LogSumExp { weights, shifts, alpha } => {
                    let mut sum = LinExpr::constant(1.0);
                    for i in 0..n {
                        let t = self.var(format!("lse{}_t{}", ci + 1, i + 1), f64::INFINITY);
                        let mut r = LinExpr::constant(shifts[i] - alpha);
                        r.add_term(self.lifted[self.space.x(i)], weights[i]);
                        self.prog
                            .add_exp(format!("lse{}_{}", ci + 1, i + 1), LinExpr::var(t), LinExpr::constant(1.0), r);
                        sum.add_term(t, -1.0);
                    }
                    self.prog.add_nonneg(format!("lse{}", ci + 1), vec![sum]);
                }
                other => {
                    return Err(SlcError::UnsupportedConstraint(format!(
                        "convex pass-through of {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    fn part(
        &mut self,
        tag: &str,
        system: MatchingSystem,
        variant: Variant,
        bound: f64,
    ) -> Result<DualPart, SlcError> {
        let n = self.space.n();
        let lambda: Vec<VarId> = (0..system.rows())
            .map(|j| self.var(format!("{tag}.lambda[{}]", system.monomials[j]), bound))
            .collect();
        let mut ys = Vec::with_capacity(system.blocks.len());
        let mut thetas = Vec::new();
        for (bi, (fb, entries)) in system.blocks.iter().zip(&system.entries).enumerate() {
            let label = format!("{tag}.{}", fb.label);
            let ybound = if fb.descriptor.is_some() {
                bound
            } else {
                let s: f64 = fb.factor.terms().map(|(_, c)| c.abs()).sum();
                bound * s.max(1.0)
            };
            let y = self.sym(&format!("{tag}.Y{}", bi + 1), n, ybound);
            // M = Σ λ_j A_j, z-part Σ λ_j c_j, t-part Σ λ_j μ_j
            let mut m = vec![vec![LinExpr::zero(); n]; n];
            let mut zc = vec![LinExpr::zero(); n];
            let mut tc = LinExpr::zero();
            for e in entries {
                let lam = lambda[e.row];
                match e.slot {
                    Slot::Quad(k, l) => {
                        m[k][l].add_term(lam, e.coef);
                        if k != l {
                            m[l][k].add_term(lam, e.coef);
                        }
                    }
                    Slot::Lin(k) => {
                        zc[k].add_term(lam, e.coef);
                    }
                    Slot::Const => {
                        tc.add_term(lam, e.coef);
                    }
                }
            }
            match variant {
                Variant::BestSlc => {
                    let mat: Vec<Vec<LinExpr>> = (0..n)
                        .map(|k| {
                            (0..n)
                                .map(|l| {
                                    let mut e = m[k][l].scaled(-1.0);
                                    e.add_term(y[k][l], -1.0);
                                    e
                                })
                                .collect()
                        })
                        .collect();
                    self.prog.add_psd(format!("{label}.stat"), &mat);
                }
                Variant::Gershgorin => {
                    let tc_vars: Vec<VarId> = (0..n)
                        .map(|k| self.var(format!("{label}.thc[{}]", k + 1), 2.0 * bound))
                        .collect();
                    let mut ta = Vec::new();
                    let mut tb = Vec::new();
                    let mut rows = Vec::new();
                    for k in 0..n {
                        let mut e = m[k][k].clone();
                        e.add_term(y[k][k], 1.0);
                        e.add_term(tc_vars[k], 1.0);
                        rows.push(e);
                    }
                    for k in 0..n {
                        for l in (k + 1)..n {
                            let a = self.var(format!("{label}.tha[{},{}]", k + 1, l + 1), 4.0 * bound);
                            let b = self.var(format!("{label}.thb[{},{}]", k + 1, l + 1), 4.0 * bound);
                            let mut e = m[k][l].scaled(2.0);
                            e.add_term(y[k][l], 2.0);
                            e.add_term(a, -1.0);
                            e.add_term(b, 1.0);
                            rows.push(e);
                            let mut t = LinExpr::zero();
                            t.add_term(a, 1.0);
                            t.add_term(b, 1.0);
                            t.add_term(tc_vars[k], -1.0);
                            t.add_term(tc_vars[l], -1.0);
                            rows.push(t);
                            ta.push(a);
                            tb.push(b);
                        }
                    }
                    self.prog.add_zero(format!("{label}.stat"), rows);
                    let mut nn: Vec<LinExpr> = tc_vars.iter().map(|&v| LinExpr::var(v)).collect();
                    nn.extend(ta.iter().chain(&tb).map(|&v| LinExpr::var(v)));
                    self.prog.add_nonneg(format!("{label}.theta"), nn);
                    thetas.push((tc_vars, ta, tb));
                }
            }
            // z_D + Σλc = 0, t_D + Σλμ = 0
            let mut zd = Vec::with_capacity(n);
            let mut eqs = Vec::with_capacity(n + 1);
            for (k, zck) in zc.iter().enumerate() {
                let z = self.lin(&fb.factor.mul_monomial(&Monomial::var(n, k), 1.0))?;
                let mut e = z.clone();
                e.add_scaled(zck, 1.0);
                eqs.push(e);
                zd.push(z);
            }
            let td = self.lin(&fb.factor)?;
            let mut e = td.clone();
            e.add_scaled(&tc, 1.0);
            eqs.push(e);
            self.prog.add_zero(format!("{label}.match"), eqs);
            self.prog.add_psd(format!("{label}.schur"), &schur(&y, &zd, &td));
            ys.push(y);
        }
        Ok(DualPart {
            system,
            lambda,
            y: ys,
            theta: thetas,
        })
    }
}

fn schur(y: &[Vec<VarId>], z: &[LinExpr], t: &LinExpr) -> Vec<Vec<LinExpr>> {
    let n = z.len();
    let mut mat = vec![vec![LinExpr::zero(); n + 1]; n + 1];
    for k in 0..n {
        for l in 0..n {
            mat[k][l] = LinExpr::var(y[k][l]);
        }
        mat[k][n] = z[k].clone();
        mat[n][k] = z[k].clone();
    }
    mat[n][n] = t.clone();
    mat
}

fn new_builder(region: &LiftedRegion) -> Builder<'_> {
    let mut b = Builder {
        prog: ConicProgram::new(),
        space: &region.space,
        lifted: Vec::new(),
        bounds: Vec::new(),
    };
    // products of up to `bound_depth` bounds keep those monomials in [0, 1]
    let lifted = region
        .space
        .monomials()
        .iter()
        .map(|m| {
            let bound = if m.degree() as usize <= region.bound_depth.max(1) {
                1.0
            } else {
                f64::INFINITY
            };
            b.var(format!("z[{m}]"), bound)
        })
        .collect();
    b.lifted = lifted;
    b
}

fn check_region(problem: &Problem, region: &LiftedRegion, d: u32) -> Result<(), SlcError> {
    if region.space.n() != problem.n() {
        return Err(SlcError::Dimension {
            expected: problem.n(),
            got: region.space.n(),
        });
    }
    if region.space.top_degree() + 1 < d {
        return Err(SlcError::UnsupportedDegree {
            degree: d,
            what: "a lifted region of lower degree",
        });
    }
    Ok(())
}

fn build_model(
    problem: &Problem,
    region: &LiftedRegion,
    family: Family,
    variant: Variant,
    opts: &ModelOptions,
) -> Result<DualModel, SlcError> {
    let n = problem.n();
    let d = family.degree();
    if d > MAX_DEGREE {
        return Err(SlcError::DegreeCap { degree: d, cap: MAX_DEGREE });
    }
    if problem.degree() > d {
        return Err(SlcError::UnsupportedDegree {
            degree: problem.degree(),
            what: "this decomposition family",
        });
    }
    check_region(problem, region, d)?;
    for f in &opts.extra_factors {
        if f.n() != n || f.degree() > 1 {
            return Err(SlcError::UnsupportedConstraint(
                "extra family factors must be affine in the problem variables".into(),
            ));
        }
    }
    let mut b = new_builder(region);
    b.region(region)?;
    // every λ is minus a lifted value or an entry of a PSD matrix bounded
    // by one; the factor two leaves room for the extra blocks
    let bound = if region.bound_depth >= region.space.top_degree() as usize {
        2.0
    } else {
        f64::INFINITY
    };
    let sys = matching_for_blocks(&problem.objective, d, family_blocks(n, d, &opts.extra_factors))?;
    let objective = b.part("obj", sys, variant, bound)?;
    let mut constraints = Vec::new();
    for (k, p) in problem.polynomial_constraints().enumerate() {
        let sys = matching_for_blocks(p, d, family_blocks(n, d, &opts.extra_factors))?;
        let part = b.part(&format!("con{}", k + 1), sys, variant, bound)?;
        // −Σ λ s ≤ 0
        let mut e = LinExpr::zero();
        for (l, s) in part.lambda.iter().zip(&part.system.rhs) {
            e.add_term(*l, *s);
        }
        b.prog.add_nonneg(format!("con{}.value", k + 1), vec![e]);
        constraints.push(part);
    }
    let mut obj = LinExpr::zero();
    for (l, s) in objective.lambda.iter().zip(&objective.system.rhs) {
        obj.add_term(*l, -s);
    }
    b.prog.set_objective(obj);
    let Builder { prog, lifted, bounds, .. } = b;
    Ok(DualModel {
        program: prog,
        n,
        d,
        variant,
        space: region.space.clone(),
        lifted,
        objective,
        constraints,
        var_bounds: bounds,
    })
}

/// Program whose optimal value is the best SLC lower bound of the
/// (normalized) problem over `region`. Polynomial constraints get their
/// own dual part with value constrained `≤ 0`.
pub fn build_best_slc_program(
    problem: &Problem,
    region: &LiftedRegion,
    family: Family,
) -> Result<DualModel, SlcError> {
    build_model(problem, region, family, Variant::BestSlc, &ModelOptions::default())
}

pub fn build_best_slc_program_with(
    problem: &Problem,
    region: &LiftedRegion,
    family: Family,
    opts: &ModelOptions,
) -> Result<DualModel, SlcError> {
    build_model(problem, region, family, Variant::BestSlc, opts)
}

/// Dominance variant: the PSD stationarity blocks are replaced by
/// `Y + Σλ_j A_j = −Z` with `Z` in the dual of the diagonally dominant
/// cone, parametrized by `θ ≥ 0`.
pub fn build_gershgorin_variant(problem: &Problem, region: &LiftedRegion) -> Result<DualModel, SlcError> {
    if problem.degree() > 3 {
        return Err(SlcError::UnsupportedDegree {
            degree: problem.degree(),
            what: "the diagonal-dominance variant",
        });
    }
    build_model(problem, region, Family::Degree3, Variant::Gershgorin, &ModelOptions::default())
}

/// Lower bound and relaxed point read from a solved model.
#[derive(Debug, Clone, PartialEq)]
pub struct RootBound {
    pub status: SolveStatus,
    /// Certified lower bound from the projected dual.
    pub lower_bound: f64,
    /// Primal objective `−Σλ_j s_j` at the returned point.
    pub objective: f64,
    pub x: Vec<f64>,
    /// Largest distance moved when clipping `x` into the unit box.
    pub clip: f64,
    pub u: DMatrix<f64>,
    pub v: BTreeMap<(usize, usize), DVector<f64>>,
    pub lifted: Vec<f64>,
    pub lambda: Vec<f64>,
}

pub fn extract_bound_and_point(model: &DualModel, sol: &ConicSolution) -> Result<RootBound, SlcError> {
    if !sol.status.is_solved() {
        return Err(SlcError::SolverStatus { status: sol.status });
    }
    Ok(read_bound(model, sol))
}

/// Like [`extract_bound_and_point`] but also accepts a solve stopped by
/// its iteration or time limit: the certified bound holds for any dual.
pub fn extract_certified(model: &DualModel, sol: &ConicSolution) -> Result<RootBound, SlcError> {
    match sol.status {
        SolveStatus::Infeasible | SolveStatus::Unbounded => Err(SlcError::SolverStatus { status: sol.status }),
        _ => Ok(read_bound(model, sol)),
    }
}

fn read_bound(model: &DualModel, sol: &ConicSolution) -> RootBound {
    let n = model.n;
    let lifted: Vec<f64> = model.lifted.iter().map(|&v| sol.value(v)).collect();
    let mut clip = 0.0f64;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let raw = lifted[model.space.x(i)];
            let c = raw.clamp(0.0, 1.0);
            clip = clip.max((raw - c).abs());
            c
        })
        .collect();
    let mut u = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            u[(i, j)] = lifted[model.space.u(i, j)];
        }
    }
    let mut v = BTreeMap::new();
    if model.space.top_degree() >= 3 {
        for i in 0..n {
            for j in i..n {
                let vec = DVector::from_fn(n, |k, _| {
                    model.space.v(i, j, k).map(|idx| lifted[idx]).unwrap_or(0.0)
                });
                v.insert((i, j), vec);
            }
        }
    }
    let lower_bound = certified_lower_bound(&model.program, &sol.dual, &model.var_bounds);
    RootBound {
        status: sol.status,
        lower_bound,
        objective: model.objective.value(&sol.primal),
        x,
        clip,
        u,
        v,
        lifted,
        lambda: model.objective.lambda.iter().map(|&l| sol.value(l)).collect(),
    }
}

/// Relaxation with fixed decompositions: `min Σ_D ⟨Q_D, Y_D⟩ + r_Dᵀz_D +
/// w_D t_D` over the Schur blocks and `region`, with each constraint
/// decomposition's value constrained `≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedModel {
    pub program: ConicProgram,
    pub space: LiftedSpace,
    pub lifted: Vec<VarId>,
    pub var_bounds: Vec<f64>,
}

fn fixed_value(b: &mut Builder<'_>, tag: &str, dec: &SlcDecomposition) -> Result<LinExpr, SlcError> {
    let n = dec.n;
    let mut total = LinExpr::zero();
    for (bi, (desc, blk)) in dec.blocks.iter().enumerate() {
        if !blk.is_quadratic() {
            return Err(SlcError::UnsupportedDegree {
                degree: blk.higher.degree() + desc.level() as u32,
                what: "fixed-decomposition relaxations",
            });
        }
        let f = desc.factor(n);
        let t = b.lin(&f)?;
        let z: Vec<LinExpr> = (0..n)
            .map(|k| b.lin(&f.mul_monomial(&Monomial::var(n, k), 1.0)))
            .collect::<Result<_, _>>()?;
        for (k, zk) in z.iter().enumerate() {
            total.add_scaled(zk, blk.r[k]);
        }
        total.add_scaled(&t, blk.w);
        if blk.q.iter().all(|&q| q == 0.0) {
            continue;
        }
        let y = b.sym(&format!("{tag}.Y{}", bi + 1), n, 1.0);
        for k in 0..n {
            for l in 0..n {
                total.add_term(y[k][l], blk.q[(k, l)]);
            }
        }
        // Y_kk ≤ 1 keeps the optimum (z/t lies in the unit box on X̄) and
        // bounds Y for the certificate
        let caps = (0..n)
            .map(|k| {
                let mut e = LinExpr::constant(1.0);
                e.add_term(y[k][k], -1.0);
                e
            })
            .collect();
        b.prog.add_nonneg(format!("{tag}.{desc}.cap"), caps);
        b.prog.add_psd(format!("{tag}.{desc}.schur"), &schur(&y, &z, &t));
    }
    Ok(total.canonical())
}

pub fn build_fixed_program(
    region: &LiftedRegion,
    objective: &SlcDecomposition,
    constraints: &[SlcDecomposition],
) -> Result<FixedModel, SlcError> {
    let mut b = new_builder(region);
    b.region(region)?;
    let obj = fixed_value(&mut b, "obj", objective)?;
    for (k, dec) in constraints.iter().enumerate() {
        let v = fixed_value(&mut b, &format!("con{}", k + 1), dec)?;
        b.prog.add_nonneg(format!("con{}.value", k + 1), vec![v.scaled(-1.0)]);
    }
    b.prog.set_objective(obj);
    let Builder { prog, lifted, bounds, .. } = b;
    Ok(FixedModel {
        program: prog,
        space: region.space.clone(),
        lifted,
        var_bounds: bounds,
    })
}

/// Solves a fixed-decomposition relaxation and returns its certified bound.
pub fn solve_fixed(model: &FixedModel, opts: &SolverOptions) -> Result<f64, SlcError> {
    let sol = solve_reference(&model.program, opts)?;
    if !sol.status.is_solved() {
        return Err(SlcError::SolverStatus { status: sol.status });
    }
    Ok(certified_lower_bound(&model.program, &sol.dual, &model.var_bounds))
}

#[derive(Debug, Clone)]
pub struct RootOptions {
    pub variant: Variant,
    pub region: RegionOptions,
    pub model: ModelOptions,
    pub solver: SolverOptions,
    /// Use the certified bound of solves stopped by a limit instead of
    /// failing.
    pub accept_inexact: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            variant: Variant::BestSlc,
            region: RegionOptions::default(),
            model: ModelOptions::default(),
            solver: SolverOptions::with_tol(1e-8),
            accept_inexact: true,
        }
    }
}

/// Bound for `problem` on its own box: normalizes, builds the region and
/// model, solves, and maps the relaxed point back.
pub fn solve_relaxation(problem: &Problem, opts: &RootOptions) -> Result<RootBound, SlcError> {
    let unit = problem.normalized()?;
    let family = Family::for_degree(unit.degree().max(3));
    let region = generate_lifted_region(&unit, family.degree(), opts.region)?;
    let model = match opts.variant {
        Variant::BestSlc => build_best_slc_program_with(&unit, &region, family, &opts.model)?,
        Variant::Gershgorin => build_gershgorin_variant(&unit, &region)?,
    };
    let sol = solve_reference(&model.program, &opts.solver)?;
    let mut rb = if opts.accept_inexact {
        extract_certified(&model, &sol)?
    } else {
        extract_bound_and_point(&model, &sol)?
    };
    rb.x = problem.bounds.from_unit(&rb.x);
    Ok(rb)
}
