//! Cone projections in scaled-vector form.
//!
//! PSD blocks are stored as `svec`: lower triangle, column-major, with the
//! off-diagonal entries multiplied by `√2` so that the Euclidean inner
//! product of two svecs equals the trace inner product of the matrices.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Kind of a contiguous run of rows in the standard form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ConeKind {
    Zero,
    NonNeg,
    Psd(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConeSpan {
    pub kind: ConeKind,
    pub start: usize,
    pub len: usize,
}

pub(crate) fn smat(k: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            if i == j {
                m[(i, i)] = v[idx];
            } else {
                let x = v[idx] / SQRT2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            idx += 1;
        }
    }
    m
}

pub(crate) fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let k = m.nrows();
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            out[idx] = if i == j { m[(i, i)] } else { m[(i, j)] * SQRT2 };
            idx += 1;
        }
    }
}

/// Attempts an in-place `LDLᵀ` of a small symmetric matrix; `true` when all
/// pivots are strictly positive (the matrix is positive definite).
fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    let k = m.nrows();
    let mut a = m.clone();
    for j in 0..k {
        let mut d = a[(j, j)];
        for p in 0..j {
            d -= a[(j, p)] * a[(j, p)] * a[(p, p)];
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        a[(j, j)] = d;
        for i in (j + 1)..k {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= a[(i, p)] * a[(j, p)] * a[(p, p)];
            }
            a[(i, j)] = s / d;
        }
    }
    true
}

/// Projects an svec onto the PSD cone in place.
pub(crate) fn project_psd(k: usize, v: &mut [f64]) {
    if k == 1 {
        v[0] = v[0].max(0.0);
        return;
    }
    let m = smat(k, v);
    if is_positive_definite(&m) {
        return;
    }
    let eig = SymmetricEigen::new(m);
    let mut lam = eig.eigenvalues.clone();
    for l in lam.iter_mut() {
        *l = l.max(0.0);
    }
    let q = &eig.eigenvectors;
    let p = q * DMatrix::from_diagonal(&lam) * q.transpose();
    svec_into(&p, v);
}

/// Smallest eigenvalue of a dense symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Euclidean projection onto the cone (primal side). Zero rows go to zero.
pub(crate) fn project(span: &ConeSpan, v: &mut [f64]) {
    match span.kind {
        ConeKind::Zero => v.iter_mut().for_each(|x| *x = 0.0),
        ConeKind::NonNeg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
        ConeKind::Psd(k) => project_psd(k, v),
    }
}

/// Projection onto the dual cone: zero cone's dual is the whole space.
pub(crate) fn project_dual(span: &ConeSpan, v: &mut [f64]) {
    match span.kind {
        ConeKind::Zero => {}
        ConeKind::NonNeg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
        ConeKind::Psd(k) => project_psd(k, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_round_trip() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m = smat(3, &v);
        let mut out = [0.0; 6];
        svec_into(&m, &mut out);
        for (a, b) in v.iter().zip(out.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn psd_projection_clips_negative_eigenvalue() {
        // [[1, 2], [2, 1]] has eigenvalues 3 and -1
        let mut v = [1.0, 2.0 * SQRT2, 1.0];
        project_psd(2, &mut v);
        let m = smat(2, &v);
        assert!((m[(0, 0)] - 1.5).abs() < 1e-12);
        assert!((m[(0, 1)] - 1.5).abs() < 1e-12);
        assert!(min_eigenvalue(&m) > -1e-12);
    }

    #[test]
    fn psd_projection_keeps_definite_input() {
        let mut v = [2.0, 0.5, 3.0];
        let before = v;
        project_psd(2, &mut v);
        assert_eq!(v, before);
    }
}
