//! Small conic programs with closed-form optima, used as a regression suite
//! for solvers and writers.

use crate::program::{ConicProgram, LinExpr, VarId};

#[derive(Debug, Clone)]
pub struct AnalyticCase {
    pub name: &'static str,
    pub program: ConicProgram,
    pub optimum: f64,
}

fn v(x: VarId) -> LinExpr {
    LinExpr::var(x)
}

fn c(k: f64) -> LinExpr {
    LinExpr::constant(k)
}

fn lin(terms: &[(VarId, f64)], k: f64) -> LinExpr {
    let mut e = LinExpr::constant(k);
    for &(x, a) in terms {
        e.add_term(x, a);
    }
    e
}

/// Symmetric matrix expression from a symmetric variable layout: entry
/// `(i, j)` for `i ≥ j` is `X[tri(i, j)]`.
fn sym_matrix(k: usize, xs: &[VarId]) -> Vec<Vec<LinExpr>> {
    let mut m = vec![vec![LinExpr::zero(); k]; k];
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            m[i][j] = v(xs[idx]);
            m[j][i] = v(xs[idx]);
            idx += 1;
        }
    }
    m
}

fn tri(k: usize, i: usize, j: usize) -> usize {
    crate::program::ConeBlock::tril_index(k, i, j)
}

/// Twenty programs over zero, nonnegative and PSD cones with known optimal
/// values.
pub fn suite() -> Vec<AnalyticCase> {
    let mut out = Vec::new();

    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(v(x));
        p.add_psd("m", &[vec![v(x), c(1.0)], vec![c(1.0), v(x)]]);
        out.push(AnalyticCase {
            name: "psd_2x2_unit_offdiag",
            program: p,
            optimum: 1.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_vars("x", 3);
        p.set_objective(lin(&[(x[0], 3.0), (x[1], 1.0), (x[2], 2.0)], 0.0));
        p.add_nonneg("x>=0", x.iter().map(|&xi| v(xi)).collect());
        p.add_zero("sum", vec![lin(&[(x[0], 1.0), (x[1], 1.0), (x[2], 1.0)], -1.0)]);
        out.push(AnalyticCase {
            name: "simplex_lp",
            program: p,
            optimum: 1.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.set_objective(lin(&[(x, 1.0), (y, 1.0)], 0.0));
        p.add_nonneg("lb", vec![lin(&[(x, 1.0)], -1.0), lin(&[(y, 1.0)], -2.0)]);
        out.push(AnalyticCase {
            name: "separable_lower_bounds",
            program: p,
            optimum: 3.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(lin(&[(x, -1.0)], 0.0));
        p.add_nonneg("box", vec![v(x), lin(&[(x, -1.0)], 4.0)]);
        out.push(AnalyticCase {
            name: "interval_max",
            program: p,
            optimum: -4.0,
        });
    }
    {
        // t ≥ a² via [[t, a], [a, 1]] ⪰ 0
        let mut p = ConicProgram::new();
        let t = p.add_var("t");
        p.set_objective(v(t));
        p.add_psd("schur", &[vec![v(t), c(3.0)], vec![c(3.0), c(1.0)]]);
        out.push(AnalyticCase {
            name: "schur_square",
            program: p,
            optimum: 9.0,
        });
    }
    {
        // λ_max([[2,1],[1,2]]) = 3
        let mut p = ConicProgram::new();
        let t = p.add_var("t");
        p.set_objective(v(t));
        p.add_psd(
            "tI-A",
            &[
                vec![lin(&[(t, 1.0)], -2.0), c(-1.0)],
                vec![c(-1.0), lin(&[(t, 1.0)], -2.0)],
            ],
        );
        out.push(AnalyticCase {
            name: "max_eigenvalue",
            program: p,
            optimum: 3.0,
        });
    }
    {
        // λ_min of the tridiagonal [2, 1] matrix of size 3 is 2 − √2
        let mut p = ConicProgram::new();
        let t = p.add_var("t");
        p.set_objective(lin(&[(t, -1.0)], 0.0));
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let m: Vec<Vec<LinExpr>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        if i == j {
                            lin(&[(t, -1.0)], a[i][j])
                        } else {
                            c(a[i][j])
                        }
                    })
                    .collect()
            })
            .collect();
        p.add_psd("A-tI", &m);
        out.push(AnalyticCase {
            name: "min_eigenvalue_tridiagonal",
            program: p,
            optimum: -(2.0 - std::f64::consts::SQRT_2),
        });
    }
    {
        // min ⟨C, X⟩ s.t. tr X = 1, X ⪰ 0 equals λ_min(C) = 1
        let mut p = ConicProgram::new();
        let x = p.add_vars("X", 3);
        p.set_objective(lin(&[(x[0], 2.0), (x[1], 2.0), (x[2], 2.0)], 0.0));
        p.add_zero("trace", vec![lin(&[(x[0], 1.0), (x[2], 1.0)], -1.0)]);
        p.add_psd("X", &sym_matrix(2, &x));
        out.push(AnalyticCase {
            name: "trace_constrained_min_eig",
            program: p,
            optimum: 1.0,
        });
    }
    {
        // eigenvalues x, x ± √2
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(v(x));
        p.add_psd(
            "m",
            &[
                vec![v(x), c(1.0), c(0.0)],
                vec![c(1.0), v(x), c(1.0)],
                vec![c(0.0), c(1.0), v(x)],
            ],
        );
        out.push(AnalyticCase {
            name: "psd_3x3_path",
            program: p,
            optimum: std::f64::consts::SQRT_2,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_vars("x", 2);
        p.set_objective(lin(&[(x[0], 1.0), (x[1], 2.0)], 0.0));
        p.add_zero("sum", vec![lin(&[(x[0], 1.0), (x[1], 1.0)], -3.0)]);
        p.add_nonneg("rows", vec![v(x[0]), v(x[1]), lin(&[(x[0], -1.0)], 2.0)]);
        out.push(AnalyticCase {
            name: "lp_with_equality",
            program: p,
            optimum: 4.0,
        });
    }
    {
        // t ≥ x², x ≥ 2
        let mut p = ConicProgram::new();
        let t = p.add_var("t");
        let x = p.add_var("x");
        p.set_objective(v(t));
        p.add_psd("epi", &[vec![v(t), v(x)], vec![v(x), c(1.0)]]);
        p.add_nonneg("x>=2", vec![lin(&[(x, 1.0)], -2.0)]);
        out.push(AnalyticCase {
            name: "epigraph_square",
            program: p,
            optimum: 4.0,
        });
    }
    {
        // max s with s² ≤ xy, x + y = 2
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        let s = p.add_var("s");
        p.set_objective(lin(&[(s, -1.0)], 0.0));
        p.add_psd("gm", &[vec![v(x), v(s)], vec![v(s), v(y)]]);
        p.add_zero("sum", vec![lin(&[(x, 1.0), (y, 1.0)], -2.0)]);
        out.push(AnalyticCase {
            name: "geometric_mean",
            program: p,
            optimum: -1.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(c(5.0));
        p.add_nonneg("x>=0", vec![v(x)]);
        out.push(AnalyticCase {
            name: "constant_objective",
            program: p,
            optimum: 5.0,
        });
    }
    {
        // McCormick envelope of −xy on the unit square
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        let u = p.add_var("u");
        p.set_objective(lin(&[(u, -1.0)], 0.0));
        p.add_nonneg(
            "mccormick",
            vec![
                v(u),
                lin(&[(x, 1.0), (u, -1.0)], 0.0),
                lin(&[(y, 1.0), (u, -1.0)], 0.0),
                lin(&[(u, 1.0), (x, -1.0), (y, -1.0)], 1.0),
                v(x),
                v(y),
                lin(&[(x, -1.0)], 1.0),
                lin(&[(y, -1.0)], 1.0),
            ],
        );
        out.push(AnalyticCase {
            name: "mccormick_bilinear",
            program: p,
            optimum: -1.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(v(x));
        p.add_psd("scalar", &[vec![lin(&[(x, 1.0)], -3.0)]]);
        out.push(AnalyticCase {
            name: "psd_1x1",
            program: p,
            optimum: 3.0,
        });
    }
    {
        // xy ≥ 1 with x, y ≥ 0
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.set_objective(lin(&[(x, 1.0), (y, 1.0)], 0.0));
        p.add_psd("hyp", &[vec![v(x), c(1.0)], vec![c(1.0), v(y)]]);
        p.add_nonneg("pos", vec![v(x), v(y)]);
        out.push(AnalyticCase {
            name: "hyperbola",
            program: p,
            optimum: 2.0,
        });
    }
    {
        // Lovász theta of the 5-cycle is √5
        let k = 5;
        let mut p = ConicProgram::new();
        let x = p.add_vars("X", k * (k + 1) / 2);
        let mut obj = LinExpr::zero();
        for j in 0..k {
            for i in j..k {
                obj.add_term(x[tri(k, i, j)], if i == j { -1.0 } else { -2.0 });
            }
        }
        p.set_objective(obj);
        let mut trace = LinExpr::constant(-1.0);
        for i in 0..k {
            trace.add_term(x[tri(k, i, i)], 1.0);
        }
        let mut rows = vec![trace];
        for i in 0..k {
            rows.push(v(x[tri(k, (i + 1) % k, i)]));
        }
        p.add_zero("theta", rows);
        p.add_psd("X", &sym_matrix(k, &x));
        out.push(AnalyticCase {
            name: "lovasz_theta_c5",
            program: p,
            optimum: -(5.0f64).sqrt(),
        });
    }
    {
        // max-cut relaxation of the unit triangle: 9/4
        let k = 3;
        let mut p = ConicProgram::new();
        let x = p.add_vars("X", 6);
        let mut obj = LinExpr::constant(-1.5);
        for j in 0..k {
            for i in (j + 1)..k {
                obj.add_term(x[tri(k, i, j)], 0.5);
            }
        }
        p.set_objective(obj);
        p.add_zero(
            "diag",
            (0..k).map(|i| lin(&[(x[tri(k, i, i)], 1.0)], -1.0)).collect(),
        );
        p.add_psd("X", &sym_matrix(k, &x));
        out.push(AnalyticCase {
            name: "maxcut_triangle",
            program: p,
            optimum: -2.25,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.set_objective(v(x));
        p.add_nonneg(
            "redundant",
            vec![lin(&[(x, 1.0)], 2.0), lin(&[(x, 1.0)], 5.0), lin(&[(x, 2.0)], 4.0)],
        );
        out.push(AnalyticCase {
            name: "redundant_lower_bounds",
            program: p,
            optimum: -2.0,
        });
    }
    {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.set_objective(lin(&[(x, 100.0), (y, 0.01)], 0.0));
        p.add_nonneg("rows", vec![lin(&[(x, 1.0), (y, 1.0)], -10.0), v(x), v(y)]);
        out.push(AnalyticCase {
            name: "badly_scaled_lp",
            program: p,
            optimum: 0.1,
        });
    }
    out
}
