//! Sparse multivariate polynomials over `f64`.
//!
//! Terms are kept in graded lexicographic order: lower total degree first,
//! and within a degree, monomials with a larger exponent on an earlier
//! variable first (`x₁² < x₁x₂ < x₂²`). Every model builder downstream
//! iterates in this order, which makes generated programs deterministic.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::SlcError;

/// Largest total degree accepted from problem files.
pub const MAX_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn one(n: usize) -> Self {
        Self { exps: vec![0; n] }
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut exps = vec![0; n];
        exps[i] = 1;
        Self { exps }
    }

    /// Product of the variables listed in `idx` (repetition allowed).
    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut exps = vec![0; n];
        for &i in idx {
            exps[i] += 1;
        }
        Self { exps }
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Variable indices with multiplicity, ascending.
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for (i, &e) in self.exps.iter().enumerate() {
            for _ in 0..e {
                out.push(i);
            }
        }
        out
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul_var(&self, i: usize) -> Monomial {
        let mut m = self.clone();
        m.exps[i] += 1;
        m
    }

    /// `self / x_i` when `x_i` divides `self`.
    pub fn div_var(&self, i: usize) -> Option<Monomial> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.exps[i] -= 1;
        Some(m)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(x)
            .fold(1.0, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }

    /// Smallest variable index with a positive exponent.
    pub fn first_var(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e > 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// All monomials in `n` variables of total degree exactly `d`, in graded
/// lexicographic order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; n];
    fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        let n = exps.len();
        if i + 1 == n {
            exps[i] = left;
            out.push(Monomial::new(exps.clone()));
            return;
        }
        for e in (0..=left).rev() {
            exps[i] = e;
            rec(i + 1, left - e, exps, out);
        }
        exps[i] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Monomial::one(0));
        }
        return out;
    }
    rec(0, d, &mut exps, &mut out);
    out
}

/// All monomials of total degree at most `d`.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::var(n, i), 1.0);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// monomials are summed.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, SlcError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(n);
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(SlcError::Dimension {
                    expected: n,
                    got: exps.len(),
                });
            }
            p.add_term(Monomial::new(exps), c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.n(), self.n);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Drops terms with `|c| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Polynomial {
        Polynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), SlcError> {
        if x.len() == self.n {
            Ok(())
        } else {
            Err(SlcError::Dimension {
                expected: self.n,
                got: x.len(),
            })
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, SlcError> {
        self.check_dim(x)?;
        Ok(self.eval(x))
    }

    /// Evaluation without the dimension check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (m, &c) in &self.terms {
            let e = m.exps[i];
            if e > 0 {
                out.add_term(m.div_var(i).unwrap(), c * e as f64);
            }
        }
        out
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, SlcError> {
        self.check_dim(x)?;
        Ok(self.grad(x))
    }

    /// Gradient without the dimension check.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (m, &c) in &self.terms {
            for i in 0..self.n {
                let e = m.exps[i];
                if e == 0 {
                    continue;
                }
                let mut v = c * e as f64;
                for (k, (&ek, &xk)) in m.exps.iter().zip(x).enumerate() {
                    let p = if k == i { ek - 1 } else { ek };
                    v *= xk.powi(p as i32);
                }
                g[i] += v;
            }
        }
        g
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        if s != 0.0 {
            for (m, &c) in &self.terms {
                out.terms.insert(m.clone(), c * s);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        if s != 0.0 {
            for (k, &c) in &self.terms {
                out.terms.insert(k.mul(m), c * s);
            }
        }
        out
    }

    /// `q(x) = p(shift + scale ∘ x)`.
    pub fn affine_substitute(&self, shift: &[f64], scale: &[f64]) -> Polynomial {
        let n = self.n;
        let mut out = Polynomial::zero(n);
        // (shift_i + scale_i x_i)^e, cached per (i, e)
        let mut cache: BTreeMap<(usize, u32), Vec<f64>> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let mut acc: Vec<(Vec<u32>, f64)> = vec![(vec![0; n], c)];
            for i in 0..n {
                let e = m.exps[i];
                if e == 0 {
                    continue;
                }
                let coefs = cache
                    .entry((i, e))
                    .or_insert_with(|| binomial_expand(shift[i], scale[i], e))
                    .clone();
                let mut next = Vec::with_capacity(acc.len() * coefs.len());
                for (exps, a) in &acc {
                    for (k, &b) in coefs.iter().enumerate() {
                        if b == 0.0 {
                            continue;
                        }
                        let mut ex = exps.clone();
                        ex[i] = k as u32;
                        next.push((ex, a * b));
                    }
                }
                acc = next;
            }
            for (ex, v) in acc {
                out.add_term(Monomial::new(ex), v);
            }
        }
        out
    }

    /// Rewrites `p` over `box` as a polynomial over the unit box:
    /// `q(x) = p(lower + (upper − lower) ∘ x)`.
    pub fn affine_box_transform(&self, b: &BoxDomain) -> Result<Polynomial, SlcError> {
        if b.dim() != self.n {
            return Err(SlcError::Dimension {
                expected: self.n,
                got: b.dim(),
            });
        }
        b.check()?;
        Ok(self.affine_substitute(&b.lower, &b.widths()))
    }

    pub fn coefficient_tensors(&self) -> CoefficientTensors {
        let d = self.degree() as usize;
        let mut by_degree = vec![BTreeMap::new(); d + 1];
        for (m, &c) in &self.terms {
            by_degree[m.degree() as usize].insert(m.indices(), c);
        }
        CoefficientTensors { n: self.n, by_degree }
    }
}

fn binomial_expand(a: f64, b: f64, e: u32) -> Vec<f64> {
    // (a + b x)^e = Σ_k C(e,k) a^{e−k} b^k x^k
    let mut out = Vec::with_capacity(e as usize + 1);
    let mut binom = 1.0;
    for k in 0..=e {
        out.push(binom * a.powi((e - k) as i32) * b.powi(k as i32));
        binom = binom * (e - k) as f64 / (k + 1) as f64;
    }
    out
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let sign = if *c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if m.degree() == 0 {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", c.abs())?;
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut acc: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                *acc.entry(a.mul(b)).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Polynomial {
            n: self.n,
            terms: acc,
        }
    }
}

/// Coefficients grouped by degree; `by_degree[k]` maps a sorted index tuple
/// `i₁ ≤ … ≤ i_k` to the coefficient of `x_{i₁}⋯x_{i_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensors {
    pub n: usize,
    pub by_degree: Vec<BTreeMap<Vec<usize>, f64>>,
}

impl CoefficientTensors {
    /// Entry of `c^k` at the given indices (any order).
    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.by_degree
            .get(key.len())
            .and_then(|t| t.get(&key))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for t in &self.by_degree {
            for (idx, &c) in t {
                p.add_term(Monomial::from_indices(self.n, idx), c);
            }
        }
        p
    }
}

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SlcError> {
        let b = Self { lower, upper };
        if b.lower.len() != b.upper.len() {
            return Err(SlcError::Dimension {
                expected: b.lower.len(),
                got: b.upper.len(),
            });
        }
        b.check()?;
        Ok(b)
    }

    pub fn unit(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn check(&self) -> Result<(), SlcError> {
        for (i, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l == u {
                return Err(SlcError::DegenerateBox { var: i + 1, value: l });
            }
            if !(l < u) {
                return Err(SlcError::InvalidBox {
                    var: i + 1,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(())
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    /// Maps a unit-box point into this box.
    pub fn from_unit(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&ti, (&l, &u))| l + (u - l) * ti)
            .collect()
    }

    /// Maps a point of this box into unit-box coordinates.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&l, &u))| (xi - l) / (u - l))
            .collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&l, &u))| xi >= l - tol && xi <= u + tol)
    }

    pub fn project(&self, x: &mut [f64]) {
        for (xi, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *xi = xi.clamp(l, u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order_within_degree() {
        let ms = monomials_of_degree(2, 2);
        let shown: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["x1^2", "x1*x2", "x2^2"]);
        assert!(Monomial::one(2) < Monomial::var(2, 1));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_up_to(3, 3).len(), 20);
        assert_eq!(monomials_of_degree(4, 4).len(), 35);
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = Polynomial::var(2, 0);
        p.add_term(Monomial::var(2, 0), -1.0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }
}
