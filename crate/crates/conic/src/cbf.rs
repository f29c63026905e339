//! Conic Benchmark Format (version 3) writer and reader.
//!
//! Scalar variables are written as one free `VAR` domain. Each PSD block
//! becomes a `PSDVAR` matrix tied to its affine entries by equality rows,
//! so the reader recovers an equivalent program with the matrix entries as
//! extra variables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::program::{Cone, ConicProgram, LinExpr, VarId};
use crate::ConicError;

/// Writes `prog` as CBF v3 text. Output is deterministic.
pub fn export_cbf(prog: &ConicProgram) -> Result<Vec<u8>, ConicError> {
    prog.check()?;
    let n = prog.num_vars();
    let mut out = String::new();
    out.push_str("# CBF v3\n");
    out.push_str("VER\n3\n\n");
    out.push_str("OBJSENSE\nMIN\n\n");

    let psd: Vec<usize> = prog.psd_dims();
    if !psd.is_empty() {
        let _ = writeln!(out, "PSDVAR\n{}", psd.len());
        for k in &psd {
            let _ = writeln!(out, "{k}");
        }
        out.push('\n');
    }

    if n > 0 {
        let _ = writeln!(out, "VAR\n{n} 1\nF {n}\n");
    } else {
        out.push_str("VAR\n0 0\n\n");
    }

    let mut cones: Vec<(String, usize)> = Vec::new();
    let mut acoord: Vec<(usize, usize, f64)> = Vec::new();
    let mut bcoord: Vec<(usize, f64)> = Vec::new();
    let mut fcoord: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let mut row = 0usize;
    let mut psd_idx = 0usize;
    for block in prog.blocks() {
        match block.cone {
            Cone::Zero | Cone::NonNeg | Cone::Exp => {
                let name = match block.cone {
                    Cone::Zero => "L=",
                    Cone::NonNeg => "L+",
                    _ => "EXP",
                };
                push_cone(&mut cones, name, block.rows.len());
                for e in &block.rows {
                    for &(v, c) in &e.terms {
                        acoord.push((row, v.0, c));
                    }
                    if e.constant != 0.0 {
                        bcoord.push((row, e.constant));
                    }
                    row += 1;
                }
            }
            Cone::Psd(k) => {
                push_cone(&mut cones, "L=", block.rows.len());
                let mut idx = 0;
                for j in 0..k {
                    for i in j..k {
                        let e = &block.rows[idx];
                        // ⟨F, X⟩ with F symmetric counts off-diagonals twice
                        let f = if i == j { 1.0 } else { 0.5 };
                        fcoord.push((row, psd_idx, i, j, f));
                        for &(v, c) in &e.terms {
                            acoord.push((row, v.0, -c));
                        }
                        if e.constant != 0.0 {
                            bcoord.push((row, -e.constant));
                        }
                        row += 1;
                        idx += 1;
                    }
                }
                psd_idx += 1;
            }
        }
    }

    if row > 0 {
        let _ = writeln!(out, "CON\n{row} {}", cones.len());
        for (name, len) in &cones {
            let _ = writeln!(out, "{name} {len}");
        }
        out.push('\n');
    }

    let obj = prog.objective();
    if !obj.terms.is_empty() {
        let _ = writeln!(out, "OBJACOORD\n{}", obj.terms.len());
        for &(v, c) in &obj.terms {
            let _ = writeln!(out, "{} {}", v.0, c);
        }
        out.push('\n');
    }
    if obj.constant != 0.0 {
        let _ = writeln!(out, "OBJBCOORD\n{}\n", obj.constant);
    }
    if !fcoord.is_empty() {
        let _ = writeln!(out, "FCOORD\n{}", fcoord.len());
        for (r, p, i, j, f) in &fcoord {
            let _ = writeln!(out, "{r} {p} {i} {j} {f}");
        }
        out.push('\n');
    }
    if !acoord.is_empty() {
        let _ = writeln!(out, "ACOORD\n{}", acoord.len());
        for (r, v, c) in &acoord {
            let _ = writeln!(out, "{r} {v} {c}");
        }
        out.push('\n');
    }
    if !bcoord.is_empty() {
        let _ = writeln!(out, "BCOORD\n{}", bcoord.len());
        for (r, c) in &bcoord {
            let _ = writeln!(out, "{r} {c}");
        }
        out.push('\n');
    }
    Ok(out.into_bytes())
}

fn push_cone(cones: &mut Vec<(String, usize)>, name: &str, len: usize) {
    if len == 0 {
        return;
    }
    match cones.last_mut() {
        // exponential cones are listed one per triple
        Some((last, l)) if last == name && name != "EXP" => *l += len,
        _ => cones.push((name.to_string(), len)),
    }
}

struct Lines<'a> {
    it: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            it: text.lines().enumerate().peekable(),
        }
    }

    /// Next non-empty, non-comment line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.it.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), ConicError> {
        self.next_line().ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ConicError> {
    s.parse().map_err(|_| ConicError::Parse {
        line,
        msg: format!("invalid number `{s}`"),
    })
}

fn fields<T: std::str::FromStr>(line: usize, s: &str, count: usize) -> Result<Vec<T>, ConicError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != count {
        return Err(ConicError::Parse {
            line,
            msg: format!("expected {count} fields, found {}", parts.len()),
        });
    }
    parts.iter().map(|p| parse_num(line, p)).collect()
}

fn tril_pos(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    let mut idx = 0;
    for c in 0..j {
        idx += k - c;
    }
    idx + (i - j)
}

/// Parses CBF v3 text. Supports free/`L=`/`L+`/`L-` scalar domains and
/// cones, `EXP` cones, `PSDVAR` and `PSDCON` blocks. Integer markers are
/// rejected.
pub fn parse_cbf(bytes: &[u8]) -> Result<ConicProgram, ConicError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ConicError::Parse {
        line: 0,
        msg: "input is not UTF-8".into(),
    })?;
    let mut lines = Lines::new(text);

    let mut maximize = false;
    let mut psdvar: Vec<usize> = Vec::new();
    let mut var_domains: Vec<(String, usize)> = Vec::new();
    let mut nvar = 0usize;
    let mut con_cones: Vec<(String, usize)> = Vec::new();
    let mut ncon = 0usize;
    let mut psdcon: Vec<usize> = Vec::new();
    let mut obj_a: Vec<(usize, f64)> = Vec::new();
    let mut obj_f: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut obj_b = 0.0;
    let mut acoord: Vec<(usize, usize, f64)> = Vec::new();
    let mut bcoord: Vec<(usize, f64)> = Vec::new();
    let mut fcoord: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let mut hcoord: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let mut dcoord: Vec<(usize, usize, usize, f64)> = Vec::new();

    while let Some((ln, head)) = lines.next_line() {
        match head {
            "VER" => {
                let (l, v) = lines.expect("version")?;
                let v: u32 = parse_num(l, v)?;
                if v > 3 {
                    return Err(ConicError::Parse {
                        line: l,
                        msg: format!("unsupported CBF version {v}"),
                    });
                }
            }
            "OBJSENSE" => {
                let (l, s) = lines.expect("objective sense")?;
                maximize = match s {
                    "MIN" => false,
                    "MAX" => true,
                    _ => {
                        return Err(ConicError::Parse {
                            line: l,
                            msg: format!("unknown objective sense `{s}`"),
                        })
                    }
                };
            }
            "PSDVAR" | "PSDCON" => {
                let (l, c) = lines.expect("count")?;
                let count: usize = parse_num(l, c)?;
                let mut dims = Vec::with_capacity(count);
                for _ in 0..count {
                    let (l, d) = lines.expect("dimension")?;
                    dims.push(parse_num(l, d)?);
                }
                if head == "PSDVAR" {
                    psdvar = dims;
                } else {
                    psdcon = dims;
                }
            }
            "VAR" | "CON" => {
                let (l, c) = lines.expect("size line")?;
                let v: Vec<usize> = fields(l, c, 2)?;
                let mut doms = Vec::with_capacity(v[1]);
                let mut total = 0;
                for _ in 0..v[1] {
                    let (l, d) = lines.expect("cone line")?;
                    let parts: Vec<&str> = d.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(ConicError::Parse {
                            line: l,
                            msg: "expected `<cone> <size>`".into(),
                        });
                    }
                    let len: usize = parse_num(l, parts[1])?;
                    match parts[0] {
                        "F" | "L=" | "L+" | "L-" => {}
                        "EXP" if len == 3 => {}
                        other => {
                            return Err(ConicError::Parse {
                                line: l,
                                msg: format!("unsupported cone `{other}` of size {len}"),
                            })
                        }
                    }
                    total += len;
                    doms.push((parts[0].to_string(), len));
                }
                if total != v[0] {
                    return Err(ConicError::Parse {
                        line: l,
                        msg: format!("cone sizes sum to {total}, header says {}", v[0]),
                    });
                }
                if head == "VAR" {
                    nvar = v[0];
                    var_domains = doms;
                } else {
                    ncon = v[0];
                    con_cones = doms;
                }
            }
            "INT" => {
                return Err(ConicError::Parse {
                    line: ln,
                    msg: "integer variables are not supported".into(),
                })
            }
            "OBJACOORD" | "OBJFCOORD" | "ACOORD" | "BCOORD" | "FCOORD" | "HCOORD" | "DCOORD" => {
                let (l, c) = lines.expect("entry count")?;
                let count: usize = parse_num(l, c)?;
                for _ in 0..count {
                    let (l, e) = lines.expect("entry")?;
                    match head {
                        "OBJACOORD" => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 2)?;
                            obj_a.push((parse_num(l, p[0])?, parse_num(l, p[1])?));
                        }
                        "OBJFCOORD" => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 4)?;
                            obj_f.push((
                                parse_num(l, p[0])?,
                                parse_num(l, p[1])?,
                                parse_num(l, p[2])?,
                                parse_num(l, p[3])?,
                            ));
                        }
                        "ACOORD" => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 3)?;
                            acoord.push((parse_num(l, p[0])?, parse_num(l, p[1])?, parse_num(l, p[2])?));
                        }
                        "BCOORD" => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 2)?;
                            bcoord.push((parse_num(l, p[0])?, parse_num(l, p[1])?));
                        }
                        "DCOORD" => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 4)?;
                            dcoord.push((
                                parse_num(l, p[0])?,
                                parse_num(l, p[1])?,
                                parse_num(l, p[2])?,
                                parse_num(l, p[3])?,
                            ));
                        }
                        _ => {
                            let p: Vec<&str> = e.split_whitespace().collect();
                            check_len(l, &p, 5)?;
                            let t = (
                                parse_num(l, p[0])?,
                                parse_num(l, p[1])?,
                                parse_num(l, p[2])?,
                                parse_num(l, p[3])?,
                                parse_num(l, p[4])?,
                            );
                            if head == "FCOORD" {
                                fcoord.push(t);
                            } else {
                                hcoord.push(t);
                            }
                        }
                    }
                }
            }
            "OBJBCOORD" => {
                let (l, v) = lines.expect("objective constant")?;
                obj_b = parse_num(l, v)?;
            }
            "POWCONES" | "POW*CONES" | "CHANGE" => {
                return Err(ConicError::Parse {
                    line: ln,
                    msg: format!("section `{head}` is not supported"),
                })
            }
            other => {
                return Err(ConicError::Parse {
                    line: ln,
                    msg: format!("unknown section `{other}`"),
                })
            }
        }
    }

    let mut prog = ConicProgram::new();
    let z = prog.add_vars("x", nvar);
    // PSDVAR entries become scalar variables (lower triangle, column-major)
    let mut psd_vars: Vec<Vec<VarId>> = Vec::new();
    for (p, &k) in psdvar.iter().enumerate() {
        psd_vars.push(prog.add_vars(&format!("X{p}"), k * (k + 1) / 2));
    }
    let check_var = |v: usize| -> Result<VarId, ConicError> {
        z.get(v).copied().ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("variable index {v} out of range"),
        })
    };
    let psd_entry = |p: usize, i: usize, j: usize| -> Result<(VarId, f64), ConicError> {
        let k = *psdvar.get(p).ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("PSD variable {p} out of range"),
        })?;
        if i >= k || j >= k {
            return Err(ConicError::Parse {
                line: 0,
                msg: format!("PSD entry ({i},{j}) outside dimension {k}"),
            });
        }
        Ok((psd_vars[p][tril_pos(k, i, j)], if i == j { 1.0 } else { 2.0 }))
    };

    let sense = if maximize { -1.0 } else { 1.0 };
    let mut obj = LinExpr::constant(sense * obj_b);
    for &(v, c) in &obj_a {
        obj.add_term(check_var(v)?, sense * c);
    }
    for &(p, i, j, c) in &obj_f {
        let (v, w) = psd_entry(p, i, j)?;
        obj.add_term(v, sense * w * c);
    }
    prog.set_objective(obj);

    // variable domains
    let mut offset = 0;
    for (dom, len) in &var_domains {
        let rows: Vec<LinExpr> = (offset..offset + len).map(|v| LinExpr::var(z[v])).collect();
        match dom.as_str() {
            "F" => {}
            "L=" => {
                prog.add_zero("var", rows);
            }
            "L+" => {
                prog.add_nonneg("var", rows);
            }
            "L-" => {
                prog.add_nonneg("var", rows.iter().map(|r| r.scaled(-1.0)).collect());
            }
            _ => {
                prog.add_exp("var", rows[0].clone(), rows[1].clone(), rows[2].clone());
            }
        }
        offset += len;
    }
    for (p, &k) in psdvar.iter().enumerate() {
        let mut m = vec![vec![LinExpr::zero(); k]; k];
        for j in 0..k {
            for i in j..k {
                m[i][j] = LinExpr::var(psd_vars[p][tril_pos(k, i, j)]);
            }
        }
        prog.add_psd(format!("psdvar{p}"), &m);
    }

    // scalar constraint rows
    let mut rows = vec![LinExpr::zero(); ncon];
    let row_ref = |r: usize| -> Result<usize, ConicError> {
        if r < ncon {
            Ok(r)
        } else {
            Err(ConicError::Parse {
                line: 0,
                msg: format!("constraint index {r} out of range"),
            })
        }
    };
    for &(r, v, c) in &acoord {
        let r = row_ref(r)?;
        rows[r].add_term(check_var(v)?, c);
    }
    for &(r, c) in &bcoord {
        let r = row_ref(r)?;
        rows[r].add_constant(c);
    }
    for &(r, p, i, j, c) in &fcoord {
        let r = row_ref(r)?;
        let (v, w) = psd_entry(p, i, j)?;
        rows[r].add_term(v, w * c);
    }
    let mut offset = 0;
    for (cone, len) in &con_cones {
        let block: Vec<LinExpr> = rows[offset..offset + len].to_vec();
        match cone.as_str() {
            "F" => {}
            "L=" => {
                prog.add_zero("con", block);
            }
            "L+" => {
                prog.add_nonneg("con", block);
            }
            "L-" => {
                prog.add_nonneg("con", block.iter().map(|r| r.scaled(-1.0)).collect());
            }
            _ => {
                prog.add_exp("con", block[0].clone(), block[1].clone(), block[2].clone());
            }
        }
        offset += len;
    }

    // PSD constraints Σ x_v H_v + D ⪰ 0
    let mut mats: Vec<BTreeMap<(usize, usize), LinExpr>> = vec![BTreeMap::new(); psdcon.len()];
    for &(p, v, i, j, c) in &hcoord {
        let k = *psdcon.get(p).ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("PSD constraint {p} out of range"),
        })?;
        if i >= k || j >= k {
            return Err(ConicError::Parse {
                line: 0,
                msg: format!("PSD entry ({i},{j}) outside dimension {k}"),
            });
        }
        let key = if i >= j { (i, j) } else { (j, i) };
        mats[p].entry(key).or_default().add_term(check_var(v)?, c);
    }
    for &(p, i, j, c) in &dcoord {
        let k = *psdcon.get(p).ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("PSD constraint {p} out of range"),
        })?;
        if i >= k || j >= k {
            return Err(ConicError::Parse {
                line: 0,
                msg: format!("PSD entry ({i},{j}) outside dimension {k}"),
            });
        }
        let key = if i >= j { (i, j) } else { (j, i) };
        mats[p].entry(key).or_default().add_constant(c);
    }
    for (p, &k) in psdcon.iter().enumerate() {
        let mut m = vec![vec![LinExpr::zero(); k]; k];
        for (&(i, j), e) in &mats[p] {
            m[i][j] = e.clone();
        }
        prog.add_psd(format!("psdcon{p}"), &m);
    }
    Ok(prog)
}

fn check_len(line: usize, p: &[&str], n: usize) -> Result<(), ConicError> {
    if p.len() == n {
        Ok(())
    } else {
        Err(ConicError::Parse {
            line,
            msg: format!("expected {n} fields, found {}", p.len()),
        })
    }
}
