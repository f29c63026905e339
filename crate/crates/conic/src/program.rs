//! Conic program intermediate representation.
//!
//! A program is a set of free scalar variables, a linear objective to be
//! minimized, and a list of cone blocks. Every block holds affine rows
//! `a·z + k` that must lie in the block's cone. PSD blocks list the lower
//! triangle of a symmetric matrix in column-major order, so a block of
//! dimension `k` carries `k(k+1)/2` rows.

use std::fmt;

/// Handle to a scalar variable of a [`ConicProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Sparse affine expression `Σ coef·z_var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((v, coef));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        if scale == 0.0 {
            return self;
        }
        for &(v, c) in &other.terms {
            self.terms.push((v, c * scale));
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn scaled(&self, scale: f64) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, scale);
        out
    }

    /// Merges duplicate variables, drops zero coefficients, and sorts by
    /// variable index.
    pub fn canonical(&self) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        LinExpr {
            terms: merged,
            constant: self.constant,
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * z[v.0])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.1 == 0.0)
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

/// Cone attached to a block of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// Every row equals zero.
    Zero,
    /// Every row is nonnegative.
    NonNeg,
    /// Rows are the lower triangle (column-major) of a PSD matrix of this
    /// dimension.
    Psd(usize),
    /// Three rows `(t, s, r)` with `t ≥ s·exp(r/s)`, `s > 0` (closure).
    /// Carried for export only.
    Exp,
}

impl Cone {
    pub fn rows_for(self, count_hint: usize) -> usize {
        match self {
            Cone::Psd(k) => k * (k + 1) / 2,
            Cone::Exp => 3,
            _ => count_hint,
        }
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Zero => write!(f, "zero"),
            Cone::NonNeg => write!(f, "nonneg"),
            Cone::Psd(k) => write!(f, "psd({k})"),
            Cone::Exp => write!(f, "exp"),
        }
    }
}

/// A block of affine rows constrained to a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub cone: Cone,
    pub rows: Vec<LinExpr>,
    pub label: String,
}

impl ConeBlock {
    /// Position of entry `(i, j)` inside the lower-triangle column-major
    /// row list of a PSD block of dimension `k`.
    pub fn tril_index(k: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        j * k - j * j.saturating_sub(1) / 2 + (i - j)
    }
}

/// A conic program in "affine rows in cones" form: minimize the objective
/// subject to every block's rows lying in its cone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProgram {
    var_names: Vec<String>,
    objective: LinExpr,
    blocks: Vec<ConeBlock>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.var_names.push(name.into());
        VarId(self.var_names.len() - 1)
    }

    pub fn add_vars(&mut self, prefix: &str, count: usize) -> Vec<VarId> {
        (0..count)
            .map(|i| self.add_var(format!("{prefix}[{i}]")))
            .collect()
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.0]
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn set_objective(&mut self, obj: LinExpr) {
        self.objective = obj.canonical();
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    fn push_block(&mut self, cone: Cone, rows: Vec<LinExpr>, label: String) -> usize {
        let rows = rows.iter().map(LinExpr::canonical).collect();
        self.blocks.push(ConeBlock { cone, rows, label });
        self.blocks.len() - 1
    }

    /// Adds `expr = 0` rows.
    pub fn add_zero(&mut self, label: impl Into<String>, rows: Vec<LinExpr>) -> usize {
        self.push_block(Cone::Zero, rows, label.into())
    }

    /// Adds `expr ≥ 0` rows.
    pub fn add_nonneg(&mut self, label: impl Into<String>, rows: Vec<LinExpr>) -> usize {
        self.push_block(Cone::NonNeg, rows, label.into())
    }

    /// Adds a PSD constraint on the symmetric matrix whose entries are
    /// given as a full `k×k` row-major array of expressions. Only the lower
    /// triangle is read.
    pub fn add_psd(&mut self, label: impl Into<String>, matrix: &[Vec<LinExpr>]) -> usize {
        let k = matrix.len();
        let mut rows = Vec::with_capacity(k * (k + 1) / 2);
        for j in 0..k {
            for row in matrix.iter().skip(j) {
                rows.push(row[j].clone());
            }
        }
        self.push_block(Cone::Psd(k), rows, label.into())
    }

    /// Adds `(t, s, r) ∈ K_exp`.
    pub fn add_exp(&mut self, label: impl Into<String>, t: LinExpr, s: LinExpr, r: LinExpr) -> usize {
        self.push_block(Cone::Exp, vec![t, s, r], label.into())
    }

    pub fn num_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn psd_dims(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter_map(|b| match b.cone {
                Cone::Psd(k) => Some(k),
                _ => None,
            })
            .collect()
    }

    pub fn has_exp_cone(&self) -> bool {
        self.blocks.iter().any(|b| b.cone == Cone::Exp)
    }

    /// Checks row counts against cone shapes and variable indices against
    /// the variable count.
    pub fn check(&self) -> Result<(), crate::ConicError> {
        let n = self.num_vars();
        let bad_var = |e: &LinExpr| e.terms.iter().any(|t| t.0 .0 >= n);
        if bad_var(&self.objective) {
            return Err(crate::ConicError::Malformed("objective references unknown variable".into()));
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            let expected = match b.cone {
                Cone::Psd(k) => Some(k * (k + 1) / 2),
                Cone::Exp => Some(3),
                _ => None,
            };
            if let Some(e) = expected {
                if b.rows.len() != e {
                    return Err(crate::ConicError::Malformed(format!(
                        "block {bi} ({}) has {} rows, expected {e}",
                        b.cone,
                        b.rows.len()
                    )));
                }
            }
            if b.rows.iter().any(bad_var) {
                return Err(crate::ConicError::Malformed(format!(
                    "block {bi} references unknown variable"
                )));
            }
            if b.rows.iter().any(|r| !r.constant.is_finite() || r.terms.iter().any(|t| !t.1.is_finite())) {
                return Err(crate::ConicError::Malformed(format!("block {bi} has non-finite data")));
            }
        }
        Ok(())
    }

    /// Evaluates every row of block `bi` at `z`.
    pub fn eval_block(&self, bi: usize, z: &[f64]) -> Vec<f64> {
        self.blocks[bi].rows.iter().map(|r| r.eval(z)).collect()
    }
}
