//! Lowering of a [`ConicProgram`] to the standard form
//! `min cᵀz s.t. A z + s = b, s ∈ K` used by the solver.

use crate::cones::{ConeKind, ConeSpan, SQRT2};
use crate::program::{Cone, ConicProgram};
use crate::ConicError;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// `out = A x`
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.nrows) {
            let (idx, val) = self.row(r);
            *o = idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    /// `out = Aᵀ y`
    pub fn mul_t(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &yr) in y.iter().enumerate().take(self.nrows) {
            if yr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                out[c] += v * yr;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub a: Csr,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub c0: f64,
    pub spans: Vec<ConeSpan>,
    /// Multiplier applied to each IR row when lowered (`√2` on PSD
    /// off-diagonals, `1` elsewhere).
    pub row_scale: Vec<f64>,
}

pub(crate) fn lower(prog: &ConicProgram) -> Result<StandardForm, ConicError> {
    prog.check()?;
    let n = prog.num_vars();
    let mut indptr = vec![0usize];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut b = Vec::new();
    let mut spans = Vec::new();
    let mut row_scale = Vec::new();
    for block in prog.blocks() {
        let kind = match block.cone {
            Cone::Zero => ConeKind::Zero,
            Cone::NonNeg => ConeKind::NonNeg,
            Cone::Psd(k) => ConeKind::Psd(k),
            Cone::Exp => {
                return Err(ConicError::UnsupportedCone {
                    cone: "exp".into(),
                    consumer: "the embedded solver",
                    hint: "export the program with the CBF writer and use an external solver",
                })
            }
        };
        let start = b.len();
        for (ri, row) in block.rows.iter().enumerate() {
            let scale = match kind {
                ConeKind::Psd(k) if !is_diag_row(k, ri) => SQRT2,
                _ => 1.0,
            };
            for &(v, coef) in &row.terms {
                indices.push(v.0);
                values.push(-scale * coef);
            }
            indptr.push(indices.len());
            b.push(scale * row.constant);
            row_scale.push(scale);
        }
        spans.push(ConeSpan {
            kind,
            start,
            len: block.rows.len(),
        });
    }
    let mut c = vec![0.0; n];
    for &(v, coef) in &prog.objective().terms {
        c[v.0] += coef;
    }
    Ok(StandardForm {
        a: Csr {
            nrows: b.len(),
            ncols: n,
            indptr,
            indices,
            values,
        },
        b,
        c,
        c0: prog.objective().constant,
        spans,
        row_scale,
    })
}

/// Whether row `ri` of a lower-triangle column-major PSD block of dimension
/// `k` is a diagonal entry.
pub(crate) fn is_diag_row(k: usize, ri: usize) -> bool {
    let mut idx = 0;
    for j in 0..k {
        if ri == idx {
            return true;
        }
        idx += k - j;
        if ri < idx {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_rows_of_three_by_three() {
        let diag: Vec<usize> = (0..6).filter(|&r| is_diag_row(3, r)).collect();
        assert_eq!(diag, vec![0, 3, 5]);
    }
}
