//! Sparse SDPA (`.dat-s`) writer.
//!
//! SDPA reads `min cᵀz  s.t.  Σ z_i F_i − F_0 ⪰ 0`. PSD blocks keep their
//! order and dimension. Nonnegative rows and equality rows share one
//! trailing diagonal block (negative size); an equality `e = 0` is written
//! as the pair `e ≥ 0`, `−e ≥ 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::program::{Cone, ConicProgram, LinExpr};
use crate::ConicError;

/// Writes `prog` in sparse SDPA format. Output is deterministic.
pub fn export_sdpa(prog: &ConicProgram) -> Result<Vec<u8>, ConicError> {
    prog.check()?;
    if prog.has_exp_cone() {
        return Err(ConicError::UnsupportedCone {
            cone: "exp".into(),
            consumer: "the SDPA writer",
            hint: "use the CBF format instead",
        });
    }
    let m = prog.num_vars();
    if m == 0 {
        return Err(ConicError::Malformed("SDPA needs at least one variable".into()));
    }

    // (matno, blkno, i, j) -> value, 1-based, i ≤ j
    let mut entries: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    let mut put = |e: &LinExpr, sign: f64, blk: usize, i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        for &(v, c) in &e.terms {
            *entries.entry((v.0 + 1, blk, i, j)).or_insert(0.0) += sign * c;
        }
        if e.constant != 0.0 {
            *entries.entry((0, blk, i, j)).or_insert(0.0) -= sign * e.constant;
        }
    };

    let mut sizes: Vec<i64> = Vec::new();
    for block in prog.blocks() {
        if let Cone::Psd(k) = block.cone {
            sizes.push(k as i64);
            let blk = sizes.len();
            let mut idx = 0;
            for j in 0..k {
                for i in j..k {
                    put(&block.rows[idx], 1.0, blk, j + 1, i + 1);
                    idx += 1;
                }
            }
        }
    }
    let lp_rows: usize = prog
        .blocks()
        .iter()
        .map(|b| match b.cone {
            Cone::NonNeg => b.rows.len(),
            Cone::Zero => 2 * b.rows.len(),
            _ => 0,
        })
        .sum();
    if lp_rows > 0 {
        sizes.push(-(lp_rows as i64));
        let blk = sizes.len();
        let mut d = 0;
        for block in prog.blocks() {
            match block.cone {
                Cone::NonNeg => {
                    for e in &block.rows {
                        d += 1;
                        put(e, 1.0, blk, d, d);
                    }
                }
                Cone::Zero => {
                    for e in &block.rows {
                        d += 1;
                        put(e, 1.0, blk, d, d);
                        d += 1;
                        put(e, -1.0, blk, d, d);
                    }
                }
                _ => {}
            }
        }
    }
    if sizes.is_empty() {
        return Err(ConicError::Malformed("SDPA needs at least one constraint block".into()));
    }

    let mut c = vec![0.0; m];
    for &(v, coef) in &prog.objective().terms {
        c[v.0] += coef;
    }

    let mut out = String::new();
    let _ = writeln!(out, "\"objective constant {}\"", prog.objective().constant);
    let _ = writeln!(out, "{m} = mDIM");
    let _ = writeln!(out, "{} = nBLOCK", sizes.len());
    let s: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{} = bLOCKsTRUCT", s.join(" "));
    let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "{}", cs.join(" "));
    for ((mat, blk, i, j), v) in entries {
        if v != 0.0 {
            let _ = writeln!(out, "{mat} {blk} {i} {j} {v}");
        }
    }
    Ok(out.into_bytes())
}
