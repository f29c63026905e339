//! Sum-of-linear-times-convex decompositions.
//!
//! A decomposition writes `p(x) = Σ_D f_D(x)·q_D(x)` where each factor
//! `f_D = ∏_{i∈I} x_i ∏_{j∈J} (1 − x_j)` is nonnegative on the unit box and
//! each `q_D` is convex. Product-form decompositions use quadratic blocks;
//! the first-type form uses factors `x_i`, `1 − x_i` only and blocks of
//! degree `d − 1`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::poly::{Monomial, Polynomial, MAX_DEGREE};
use crate::SlcError;

/// Multisets `I` (factors `x_i`) and `J` (factors `1 − x_j`), both sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Descriptor {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl Descriptor {
    pub fn new(mut i: Vec<usize>, mut j: Vec<usize>) -> Self {
        i.sort_unstable();
        j.sort_unstable();
        Self { i, j }
    }

    pub fn one() -> Self {
        Self::new(vec![], vec![])
    }

    pub fn x(i: usize) -> Self {
        Self::new(vec![i], vec![])
    }

    pub fn one_minus(j: usize) -> Self {
        Self::new(vec![], vec![j])
    }

    /// Number of linear factors.
    pub fn level(&self) -> usize {
        self.i.len() + self.j.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let a: f64 = self.i.iter().map(|&k| x[k]).product();
        let b: f64 = self.j.iter().map(|&k| 1.0 - x[k]).product();
        a * b
    }

    /// The factor `f_D` as a polynomial in `n` variables.
    pub fn factor(&self, n: usize) -> Polynomial {
        let mut p = Polynomial::constant(n, 1.0);
        for &k in &self.i {
            p = &p * &Polynomial::var(n, k);
        }
        for &k in &self.j {
            let mut f = Polynomial::constant(n, 1.0);
            f.add_term(Monomial::var(n, k), -1.0);
            p = &p * &f;
        }
        p
    }

    /// Number of ordered factor sequences that produce this multiset pair.
    fn orderings(&self) -> f64 {
        fn fact(k: usize) -> f64 {
            (1..=k).map(|v| v as f64).product()
        }
        let mut denom = 1.0;
        for set in [&self.i, &self.j] {
            let mut k = 0;
            while k < set.len() {
                let mut run = 1;
                while k + run < set.len() && set[k + run] == set[k] {
                    run += 1;
                }
                denom *= fact(run);
                k += run;
            }
        }
        fact(self.level()) / denom
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level() == 0 {
            return write!(f, "1");
        }
        let mut parts: Vec<String> = self.i.iter().map(|k| format!("x{}", k + 1)).collect();
        parts.extend(self.j.iter().map(|k| format!("(1-x{})", k + 1)));
        write!(f, "{}", parts.join("*"))
    }
}

/// Multisets of size `k` drawn from `0..n`, ascending.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
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
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// The product-form family: every multiset pair `(I, J)` with
/// `|I| + |J| ≤ d − 2`. Ordered by level, then by `|J|`, then
/// lexicographically.
pub fn family_descriptors(n: usize, d: u32) -> Vec<Descriptor> {
    let top = (d as usize).saturating_sub(2);
    let mut out = Vec::new();
    for level in 0..=top {
        for nj in 0..=level {
            for i in multisets(n, level - nj) {
                for j in multisets(n, nj) {
                    out.push(Descriptor { i: i.clone(), j });
                }
            }
        }
    }
    out
}

/// Convex block `xᵀQx + rᵀx + w + h(x)`; `h` holds terms of degree ≥ 3
/// and is only used by first-type decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBlock {
    pub q: DMatrix<f64>,
    pub r: DVector<f64>,
    pub w: f64,
    pub higher: Polynomial,
}

impl ConvexBlock {
    pub fn zeros(n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, n),
            r: DVector::zeros(n),
            w: 0.0,
            higher: Polynomial::zero(n),
        }
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Adds `c·x_a·x_b` to the quadratic part, split symmetrically.
    pub fn add_product(&mut self, a: usize, b: usize, c: f64) {
        if a == b {
            self.q[(a, a)] += c;
        } else {
            self.q[(a, b)] += 0.5 * c;
            self.q[(b, a)] += 0.5 * c;
        }
    }

    /// Adds a polynomial of arbitrary degree, routing each term to the
    /// matching part.
    pub fn add_polynomial(&mut self, p: &Polynomial) {
        for (m, c) in p.terms() {
            let idx = m.indices();
            match idx.len() {
                0 => self.w += c,
                1 => self.r[idx[0]] += c,
                2 => self.add_product(idx[0], idx[1], c),
                _ => self.higher.add_term(m.clone(), c),
            }
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.higher.is_zero()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let n = self.n();
        let mut p = self.higher.clone();
        p.add_term(Monomial::one(n), self.w);
        for k in 0..n {
            p.add_term(Monomial::var(n, k), self.r[k]);
            p.add_term(Monomial::from_indices(n, &[k, k]), self.q[(k, k)]);
            for l in (k + 1)..n {
                p.add_term(Monomial::from_indices(n, &[k, l]), self.q[(k, l)] + self.q[(l, k)]);
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        (xv.transpose() * &self.q * &xv)[(0, 0)] + self.r.dot(&xv) + self.w + self.higher.eval(x)
    }

    /// Smallest row margin `min_l (H_ll − Σ_{k≠l} |H_lk|)` of the Hessian,
    /// bounded over the unit box for blocks with higher-degree terms.
    pub fn dominance_margin(&self) -> f64 {
        if self.is_quadratic() {
            return -2.0 * gershgorin_alpha(&self.q);
        }
        let n = self.n();
        let hess = hessian_polys(&self.to_polynomial());
        let mut margin = f64::INFINITY;
        for l in 0..n {
            let mut row = box_lower(&hess[l][l]);
            for k in 0..n {
                if k != l {
                    row -= abs_coef_sum(&hess[l][k]);
                }
            }
            margin = margin.min(row);
        }
        margin
    }

    /// Convexity certificate by diagonal dominance of the Hessian.
    pub fn is_dominant(&self, tol: f64) -> bool {
        self.dominance_margin() >= -tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        slcpop_conic::min_eigenvalue(&self.q)
    }
}

/// Symbolic Hessian of `p`.
pub fn hessian_polys(p: &Polynomial) -> Vec<Vec<Polynomial>> {
    let n = p.n();
    let grad: Vec<Polynomial> = (0..n).map(|i| p.derivative(i)).collect();
    (0..n)
        .map(|i| (0..n).map(|j| grad[i].derivative(j)).collect())
        .collect()
}

fn abs_coef_sum(p: &Polynomial) -> f64 {
    p.terms().map(|(_, c)| c.abs()).sum()
}

/// Lower bound of `p` over the unit box from its coefficients: the constant
/// term plus every negative coefficient.
fn box_lower(p: &Polynomial) -> f64 {
    p.terms()
        .map(|(m, c)| if m.degree() == 0 { c } else { c.min(0.0) })
        .sum()
}

/// `max(0, max_k(Σ_{j≠k} |Q_kj| − Q_kk))`.
pub fn gershgorin_alpha(q: &DMatrix<f64>) -> f64 {
    let n = q.nrows();
    let mut alpha = 0.0f64;
    for k in 0..n {
        let off: f64 = (0..n).filter(|&j| j != k).map(|j| q[(k, j)].abs()).sum();
        alpha = alpha.max(off - q[(k, k)]);
    }
    alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    Degree3,
    Degree4,
    General,
    FirstType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlcDecomposition {
    pub n: usize,
    pub d: u32,
    pub kind: DecompositionKind,
    pub blocks: Vec<(Descriptor, ConvexBlock)>,
    /// Convexification constant; block `D` received `α·w_D‖x‖²`.
    pub alpha: f64,
}

impl SlcDecomposition {
    pub fn block(&self, d: &Descriptor) -> Option<&ConvexBlock> {
        self.blocks.iter().find(|(k, _)| k == d).map(|(_, b)| b)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.blocks.iter().map(|(d, b)| d.eval(x) * b.eval(x)).sum()
    }

    pub fn all_dominant(&self, tol: f64) -> bool {
        self.blocks.iter().all(|(_, b)| b.is_dominant(tol))
    }
}

/// Expands `Σ f_D·q_D`.
pub fn reconstruct(dec: &SlcDecomposition) -> Polynomial {
    let mut out = Polynomial::zero(dec.n);
    for (d, b) in &dec.blocks {
        let term = &d.factor(dec.n) * &b.to_polynomial();
        out = &out + &term;
    }
    out
}

/// Weight of the `α‖x‖²` share given to block `D`, chosen so that
/// `Σ_D w_D f_D(x)` is constant on the family.
pub fn convexification_weight(kind: DecompositionKind, d: u32, desc: &Descriptor) -> f64 {
    match kind {
        DecompositionKind::Degree3 | DecompositionKind::FirstType => 1.0,
        _ if d <= 4 => {
            // the cross factor x_i(1 − x_i) carries twice the share
            if desc.i.len() == 1 && desc.j.len() == 1 && desc.i == desc.j {
                2.0
            } else {
                1.0
            }
        }
        _ => desc.orderings(),
    }
}

/// Raw (pre-convexification) placement of the terms of `p` into the
/// product-form family of degree `d`: a term of degree `k ≥ 3` with sorted
/// variable indices `σ` goes to block `(σ₁…σ_{k−2}, ∅)` as the product of
/// its last two variables; a term of degree 2 or 1 goes to block
/// `({σ₁}, ∅)` as a linear or constant part; the constant goes to the
/// block `(∅, ∅)`.
pub fn place_terms(p: &Polynomial, d: u32) -> Vec<(Descriptor, ConvexBlock)> {
    let n = p.n();
    let mut blocks: Vec<(Descriptor, ConvexBlock)> = family_descriptors(n, d)
        .into_iter()
        .map(|desc| (desc, ConvexBlock::zeros(n)))
        .collect();
    let pos = |blocks: &Vec<(Descriptor, ConvexBlock)>, desc: &Descriptor| {
        blocks.iter().position(|(k, _)| k == desc).unwrap()
    };
    for (m, c) in p.terms() {
        let idx = m.indices();
        let k = idx.len();
        match k {
            0 => {
                let at = pos(&blocks, &Descriptor::one());
                blocks[at].1.w += c;
            }
            1 => {
                let at = pos(&blocks, &Descriptor::x(idx[0]));
                blocks[at].1.w += c;
            }
            2 => {
                let at = pos(&blocks, &Descriptor::x(idx[0]));
                blocks[at].1.r[idx[1]] += c;
            }
            _ => {
                let desc = Descriptor::new(idx[..k - 2].to_vec(), vec![]);
                let at = pos(&blocks, &desc);
                blocks[at].1.add_product(idx[k - 2], idx[k - 1], c);
            }
        }
    }
    blocks
}

/// Adds `α·w_D‖x‖²` to every block and the cancelling linear terms
/// `−α·K·x_i` to the blocks `({i}, ∅)`, where `K = Σ_D w_D f_D`.
pub fn convexify(
    n: usize,
    d: u32,
    kind: DecompositionKind,
    mut blocks: Vec<(Descriptor, ConvexBlock)>,
    alpha: f64,
) -> SlcDecomposition {
    let k_const: f64 = blocks
        .iter()
        .filter(|(desc, _)| desc.i.is_empty())
        .map(|(desc, _)| convexification_weight(kind, d, desc))
        .sum();
    for (desc, b) in blocks.iter_mut() {
        let w = convexification_weight(kind, d, desc);
        for k in 0..n {
            b.q[(k, k)] += alpha * w;
        }
        if desc.j.is_empty() && desc.i.len() == 1 {
            b.r[desc.i[0]] -= alpha * k_const;
        }
    }
    SlcDecomposition {
        n,
        d,
        kind,
        blocks,
        alpha,
    }
}

/// Smallest `α` making every raw block dominant after `convexify`.
pub fn required_alpha(kind: DecompositionKind, d: u32, blocks: &[(Descriptor, ConvexBlock)]) -> f64 {
    blocks.iter().fold(0.0f64, |a, (desc, b)| {
        let g = gershgorin_alpha(&b.q);
        if g > 0.0 {
            a.max(g / convexification_weight(kind, d, desc))
        } else {
            a
        }
    })
}

fn product_form(p: &Polynomial, d: u32, kind: DecompositionKind) -> SlcDecomposition {
    let raw = place_terms(p, d);
    let alpha = required_alpha(kind, d, &raw);
    convexify(p.n(), d, kind, raw, alpha)
}

pub fn construct_slc_degree3(p: &Polynomial) -> Result<SlcDecomposition, SlcError> {
    if p.degree() > 3 {
        return Err(SlcError::UnsupportedDegree {
            degree: p.degree(),
            what: "the degree-3 construction",
        });
    }
    Ok(product_form(p, 3, DecompositionKind::Degree3))
}

pub fn construct_slc_degree4(p: &Polynomial) -> Result<SlcDecomposition, SlcError> {
    if p.degree() > 4 {
        return Err(SlcError::UnsupportedDegree {
            degree: p.degree(),
            what: "the degree-4 construction",
        });
    }
    Ok(product_form(p, 4, DecompositionKind::Degree4))
}

/// Product-form construction over the family of degree `d`.
pub fn construct_slc_general(p: &Polynomial, d: u32) -> Result<SlcDecomposition, SlcError> {
    if d > MAX_DEGREE {
        return Err(SlcError::DegreeCap { degree: d, cap: MAX_DEGREE });
    }
    if p.degree() > d {
        return Err(SlcError::UnsupportedDegree {
            degree: p.degree(),
            what: "a family of lower degree",
        });
    }
    match d {
        0..=3 => construct_slc_degree3(p),
        4 => construct_slc_degree4(p),
        _ => Ok(product_form(p, d, DecompositionKind::General)),
    }
}

/// Raw first-type placement: each term of degree ≥ 1 goes to block
/// `({i}, ∅)` divided by `x_i`, `i` its smallest variable; the constant `c`
/// is split as `c·x₁ + c·(1 − x₁)`.
pub fn place_terms_first_type(p: &Polynomial) -> Vec<(Descriptor, ConvexBlock)> {
    let n = p.n();
    let mut blocks: Vec<(Descriptor, ConvexBlock)> = Vec::with_capacity(2 * n);
    for i in 0..n {
        blocks.push((Descriptor::x(i), ConvexBlock::zeros(n)));
    }
    for i in 0..n {
        blocks.push((Descriptor::one_minus(i), ConvexBlock::zeros(n)));
    }
    for (m, c) in p.terms() {
        match m.first_var() {
            Some(i) => {
                let mut t = Polynomial::zero(n);
                t.add_term(m.div_var(i).unwrap(), c);
                blocks[i].1.add_polynomial(&t);
            }
            None => {
                if n > 0 {
                    blocks[0].1.w += c;
                    blocks[n].1.w += c;
                }
            }
        }
    }
    blocks
}

/// Hessian shift that makes a block diagonally
/// dominant over the unit box, `max_l(Σ_{k≠l} Σ|coef H_lk| − lb(H_ll))`,
/// where `lb` keeps the constant and the negative coefficients of `H_ll`.
pub fn first_type_hessian_bound(block: &ConvexBlock) -> f64 {
    (-block.dominance_margin()).max(0.0)
}

pub fn construct_slc_first_type(p: &Polynomial) -> Result<SlcDecomposition, SlcError> {
    let d = p.degree();
    if d < 3 {
        return Err(SlcError::UnsupportedDegree {
            degree: d,
            what: "the first-type construction",
        });
    }
    let n = p.n();
    let raw = place_terms_first_type(p);
    // α‖x‖² shifts the Hessian diagonal by 2α
    let alpha = raw
        .iter()
        .map(|(_, b)| first_type_hessian_bound(b) / 2.0)
        .fold(0.0, f64::max);
    Ok(convexify_first_type(n, d, raw, alpha))
}

/// `p̄_i = p_i + α‖x‖² − αn·x_i`, `q̄_i = q_i + α‖x‖²`.
pub fn convexify_first_type(
    n: usize,
    d: u32,
    mut blocks: Vec<(Descriptor, ConvexBlock)>,
    alpha: f64,
) -> SlcDecomposition {
    for (desc, b) in blocks.iter_mut() {
        for k in 0..n {
            b.q[(k, k)] += alpha;
        }
        if let [i] = desc.i[..] {
            b.r[i] -= alpha * n as f64;
        }
    }
    SlcDecomposition {
        n,
        d,
        kind: DecompositionKind::FirstType,
        blocks,
        alpha,
    }
}
