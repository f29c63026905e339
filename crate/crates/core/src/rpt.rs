//! Lifted region from constraint products and the perspective objectives
//! of the primal relaxation.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::poly::{monomials_up_to, Monomial, Polynomial};
use crate::problem::{Constraint, Problem};
use crate::slc::SlcDecomposition;
use crate::SlcError;

/// One lifted variable per monomial of degree `1..=top`; degree one are the
/// original `x`, degree two the entries of `U`, degree three the entries of
/// the vectors `v_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSpace {
    n: usize,
    top: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl LiftedSpace {
    /// Lifted space for a relaxation of degree `d`: monomials up to `d − 1`
    /// (at least two).
    pub fn new(n: usize, d: u32) -> Self {
        let top = d.saturating_sub(1).max(2);
        let monomials: Vec<Monomial> = monomials_up_to(n, top)
            .into_iter()
            .filter(|m| m.degree() >= 1)
            .collect();
        let index = monomials
            .iter()
            .enumerate()
            .map(|(k, m)| (m.clone(), k))
            .collect();
        Self {
            n,
            top,
            monomials,
            index,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest lifted degree.
    pub fn top_degree(&self) -> u32 {
        self.top
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn x(&self, i: usize) -> usize {
        self.index[&Monomial::var(self.n, i)]
    }

    /// `u_ij`, shared by `(i, j)` and `(j, i)`.
    pub fn u(&self, i: usize, j: usize) -> usize {
        self.index[&Monomial::from_indices(self.n, &[i, j])]
    }

    /// Entry `k` of `v_ij`.
    pub fn v(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        self.index_of(&Monomial::from_indices(self.n, &[i, j, k]))
    }

    /// Values of every lifted variable under the exact lifting of `x`.
    pub fn exact(&self, x: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.eval(x)).collect()
    }

    /// Writes `p` as `constant + Σ coef·z_k` over the lifted variables.
    pub fn linearize(&self, p: &Polynomial) -> Result<(f64, Vec<(usize, f64)>), SlcError> {
        let mut constant = 0.0;
        let mut coeffs = Vec::with_capacity(p.num_terms());
        for (m, c) in p.terms() {
            if m.degree() == 0 {
                constant += c;
            } else {
                let k = self.index_of(m).ok_or(SlcError::UnsupportedDegree {
                    degree: m.degree(),
                    what: "the lifted space",
                })?;
                coeffs.push((k, c));
            }
        }
        Ok((constant, coeffs))
    }

    /// Reads the linearization of `p` at lifted values `z`; `None` if `p`
    /// has terms above the lifted degree.
    pub fn linear_value(&self, p: &Polynomial, z: &[f64]) -> Option<f64> {
        let mut v = 0.0;
        for (m, c) in p.terms() {
            if m.degree() == 0 {
                v += c;
            } else {
                v += c * z[self.index_of(m)?];
            }
        }
        Some(v)
    }

    /// Lifted values from `x`, `U` and, for `top ≥ 3`, the vectors `v_ij`
    /// (`v_ij[k]` stands for `x_i x_j x_k`). Missing entries of higher
    /// degree fall back to the exact lifting.
    pub fn values_from(
        &self,
        x: &[f64],
        u: &DMatrix<f64>,
        v: Option<&BTreeMap<(usize, usize), DVector<f64>>>,
    ) -> Vec<f64> {
        self.monomials
            .iter()
            .map(|m| {
                let idx = m.indices();
                match idx.len() {
                    1 => x[idx[0]],
                    2 => u[(idx[0], idx[1])],
                    3 => match v.and_then(|v| v.get(&(idx[0], idx[1]))) {
                        Some(vec) => vec[idx[2]],
                        None => m.eval(x),
                    },
                    _ => m.eval(x),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `constant + Σ coef·z ≥ 0`.
    NonNegative,
    /// `constant + Σ coef·z = 0`.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    /// Product that generated the row, e.g. `x1*(1-x2)`.
    pub tag: String,
}

impl LinearRow {
    pub fn value(&self, z: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(k, c)| c * z[k]).sum::<f64>()
    }

    pub fn violation(&self, z: &[f64]) -> f64 {
        let v = self.value(z);
        match self.kind {
            RowKind::NonNegative => (-v).max(0.0),
            RowKind::Zero => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRegion {
    pub space: LiftedSpace,
    pub rows: Vec<LinearRow>,
    /// Convex constraints on `x` passed through unmultiplied.
    pub convex: Vec<Constraint>,
    /// Longest product of bound constraints included.
    pub bound_depth: usize,
}

impl LiftedRegion {
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(z)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionOptions {
    /// Longest product of bound constraints; defaults to `d − 1`.
    pub bound_depth: Option<usize>,
}

fn bound_factor(n: usize, f: usize) -> (Polynomial, String) {
    if f < n {
        (Polynomial::var(n, f), format!("x{}", f + 1))
    } else {
        let k = f - n;
        let mut p = Polynomial::constant(n, 1.0);
        p.add_term(Monomial::var(n, k), -1.0);
        (p, format!("(1-x{})", k + 1))
    }
}

fn push_row(
    space: &LiftedSpace,
    rows: &mut Vec<LinearRow>,
    p: &Polynomial,
    kind: RowKind,
    tag: String,
) -> Result<(), SlcError> {
    let (constant, coeffs) = space.linearize(p)?;
    rows.push(LinearRow {
        constant,
        coeffs,
        kind,
        tag,
    });
    Ok(())
}

fn is_unit_box(problem: &Problem) -> bool {
    problem.bounds.lower.iter().all(|&l| l == 0.0) && problem.bounds.upper.iter().all(|&u| u == 1.0)
}

/// Builds `X̄` for a problem on the unit box: the bound constraints, the
/// four McCormick rows for every pair `i ≤ j`, products of up to
/// `bound_depth` bound constraints, linear constraints and their products
/// with each bound, and the convex constraints unchanged. Polynomial
/// constraints are left to the caller.
pub fn generate_lifted_region(
    problem: &Problem,
    d: u32,
    opts: RegionOptions,
) -> Result<LiftedRegion, SlcError> {
    if !is_unit_box(problem) {
        return Err(SlcError::UnsupportedConstraint(
            "the lifted region needs a problem on the unit box".into(),
        ));
    }
    let n = problem.n();
    let space = LiftedSpace::new(n, d);
    let depth = opts.bound_depth.unwrap_or(space.top_degree() as usize);
    if depth > space.top_degree() as usize {
        return Err(SlcError::UnsupportedConstraint(format!(
            "bound products of depth {depth} exceed the lifted degree {}",
            space.top_degree()
        )));
    }
    let mut rows = Vec::new();
    for f in 0..2 * n {
        let (p, tag) = bound_factor(n, f);
        push_row(&space, &mut rows, &p, RowKind::NonNegative, tag)?;
    }
    if depth >= 2 {
        for i in 0..n {
            for j in i..n {
                for (a, b) in [(i, j), (i, n + j), (n + i, j), (n + i, n + j)] {
                    let (pa, ta) = bound_factor(n, a);
                    let (pb, tb) = bound_factor(n, b);
                    push_row(&space, &mut rows, &(&pa * &pb), RowKind::NonNegative, format!("{ta}*{tb}"))?;
                }
            }
        }
    }
    for k in 3..=depth {
        for combo in multisets(2 * n, k) {
            let mut p = Polynomial::constant(n, 1.0);
            let mut tags = Vec::with_capacity(k);
            for &f in &combo {
                let (pf, tf) = bound_factor(n, f);
                p = &p * &pf;
                tags.push(tf);
            }
            push_row(&space, &mut rows, &p, RowKind::NonNegative, tags.join("*"))?;
        }
    }
    let mut convex = Vec::new();
    for (ci, c) in problem.constraints.iter().enumerate() {
        match c {
            Constraint::Linear { a, b } => {
                if a.len() != n {
                    return Err(SlcError::Dimension { expected: n, got: a.len() });
                }
                let mut ell = Polynomial::constant(n, *b);
                for (k, &ak) in a.iter().enumerate() {
                    ell.add_term(Monomial::var(n, k), -ak);
                }
                let tag = format!("g{}", ci + 1);
                push_row(&space, &mut rows, &ell, RowKind::NonNegative, tag.clone())?;
                if depth >= 2 {
                    for f in 0..2 * n {
                        let (pf, tf) = bound_factor(n, f);
                        push_row(&space, &mut rows, &(&ell * &pf), RowKind::NonNegative, format!("{tag}*{tf}"))?;
                    }
                }
            }
            Constraint::Polynomial(_) => {}
            Constraint::LogSumExp { .. } => convex.push(c.clone()),
        }
    }
    Ok(LiftedRegion {
        space,
        rows,
        convex,
        bound_depth: depth,
    })
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

const PERSPECTIVE_EPS: f64 = 1e-12;

/// `t·q(z/t)` for `q(y) = yᵀQy + rᵀy + w`, with `0·q(0/0) = 0` and `+∞`
/// when `t = 0` and the quadratic part sees `z ≠ 0`.
pub fn perspective(q: &DMatrix<f64>, r: &DVector<f64>, w: f64, z: &DVector<f64>, t: f64) -> f64 {
    let quad = (z.transpose() * q * z)[(0, 0)];
    let lin = r.dot(z) + w * t;
    if t > PERSPECTIVE_EPS {
        return quad / t + lin;
    }
    if z.norm() <= PERSPECTIVE_EPS {
        return 0.0;
    }
    if quad.abs() <= PERSPECTIVE_EPS {
        lin
    } else if quad > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Perspective sum `Σ_D t_D·q_D(z_D/t_D)` with `t_D = L(f_D)` and
/// `z_D = L(f_D·x)`. Blocks with terms above degree two give NaN.
pub fn evaluate_g(space: &LiftedSpace, z: &[f64], dec: &SlcDecomposition) -> f64 {
    let n = dec.n;
    let mut total = 0.0;
    for (desc, b) in &dec.blocks {
        if !b.is_quadratic() {
            return f64::NAN;
        }
        let f = desc.factor(n);
        let Some(t) = space.linear_value(&f, z) else {
            return f64::NAN;
        };
        let mut zv = DVector::zeros(n);
        for k in 0..n {
            let fx = f.mul_monomial(&Monomial::var(n, k), 1.0);
            match space.linear_value(&fx, z) {
                Some(v) => zv[k] = v,
                None => return f64::NAN,
            }
        }
        total += perspective(&b.q, &b.r, b.w, &zv, t);
    }
    total
}

/// Degree-3 relaxation objective at `(x, U)`.
pub fn evaluate_g3(x: &[f64], u: &DMatrix<f64>, dec: &SlcDecomposition) -> f64 {
    let space = LiftedSpace::new(x.len(), 3);
    evaluate_g(&space, &space.values_from(x, u, None), dec)
}

/// Degree-4 relaxation objective at `(x, U, V)`.
pub fn evaluate_g4(
    x: &[f64],
    u: &DMatrix<f64>,
    v: &BTreeMap<(usize, usize), DVector<f64>>,
    dec: &SlcDecomposition,
) -> f64 {
    let space = LiftedSpace::new(x.len(), 4);
    evaluate_g(&space, &space.values_from(x, u, Some(v)), dec)
}

/// `θ_ij = x − U_i − U_j + v_ij`.
pub fn theta_ij(
    x: &[f64],
    u: &DMatrix<f64>,
    v: &BTreeMap<(usize, usize), DVector<f64>>,
    i: usize,
    j: usize,
) -> DVector<f64> {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    let xv = DVector::from_column_slice(x);
    &xv - u.column(i) - u.column(j) + &v[&(a, b)]
}

/// Exact `v_ij = x_i x_j x` for all `i ≤ j`.
pub fn exact_v(x: &[f64]) -> BTreeMap<(usize, usize), DVector<f64>> {
    let n = x.len();
    let xv = DVector::from_column_slice(x);
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            out.insert((i, j), &xv * (x[i] * x[j]));
        }
    }
    out
}
