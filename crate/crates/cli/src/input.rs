//! Problem files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "bounds": [[0, 1], [-1, 1]],
//!   "objective": [{"exps": [3, 0], "coef": 1.0}, {"exps": [1, 1], "coef": -2.0}],
//!   "constraints": [
//!     {"kind": "linear", "a": [1, 1], "b": 1.5},
//!     {"kind": "polynomial", "terms": [{"exps": [2, 0], "coef": 1.0}, {"exps": [0, 0], "coef": -0.5}]},
//!     {"kind": "log-sum-exp", "alpha": 1.0}
//!   ]
//! }
//! ```
//!
//! `bounds` defaults to the unit box. Polynomial constraints read `p(x) ≤ 0`,
//! linear ones `aᵀx ≤ b`, and log-sum-exp ones
//! `log Σ exp(w_i x_i + s_i) ≤ alpha` with `weights` and `shifts`
//! defaulting to ones and zeros.

use serde::{Deserialize, Serialize};
use slcpop_core::poly::{BoxDomain, Monomial, Polynomial, MAX_DEGREE};
use slcpop_core::problem::{Constraint, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Linear {
        a: Vec<f64>,
        b: f64,
    },
    Polynomial {
        terms: Vec<Term>,
    },
    LogSumExp {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shifts: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    pub objective: Vec<Term>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn err<T>(msg: String) -> Result<T, InputError> {
    Err(InputError(msg))
}

fn check_terms(n: usize, terms: &[Term], what: &str) -> Result<(), InputError> {
    for (k, t) in terms.iter().enumerate() {
        if t.exps.len() != n {
            return err(format!(
                "{what} term {k}: exponent vector has length {}, expected {n}",
                t.exps.len()
            ));
        }
        let deg: u32 = t.exps.iter().sum();
        if deg > MAX_DEGREE {
            return err(format!("{what} term {k}: degree {deg} exceeds the cap of {MAX_DEGREE}"));
        }
        if !t.coef.is_finite() {
            return err(format!("{what} term {k}: coefficient is not finite"));
        }
    }
    Ok(())
}

fn check_vec(n: usize, v: &[f64], what: &str) -> Result<(), InputError> {
    if v.len() != n {
        return err(format!("{what}: length {}, expected {n}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return err(format!("{what}: entries must be finite"));
    }
    Ok(())
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, InputError> {
    let pf: ProblemFile = serde_json::from_str(text).map_err(|e| InputError(format!("invalid problem file: {e}")))?;
    let n = pf.n;
    if n == 0 {
        return err("n must be positive".into());
    }
    if let Some(b) = &pf.bounds {
        if b.len() != n {
            return err(format!("bounds: {} entries, expected {n}", b.len()));
        }
        for (i, [l, u]) in b.iter().enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return err(format!("bounds of x{}: must be finite", i + 1));
            }
            if l >= u {
                return err(format!("bounds of x{}: lower {l} must be below upper {u}", i + 1));
            }
        }
    }
    check_terms(n, &pf.objective, "objective")?;
    for (k, c) in pf.constraints.iter().enumerate() {
        let what = format!("constraint {k}");
        match c {
            ConstraintSpec::Linear { a, b } => {
                check_vec(n, a, &format!("{what} a"))?;
                if !b.is_finite() {
                    return err(format!("{what}: b must be finite"));
                }
            }
            ConstraintSpec::Polynomial { terms } => check_terms(n, terms, &what)?,
            ConstraintSpec::LogSumExp { alpha, weights, shifts } => {
                if !alpha.is_finite() {
                    return err(format!("{what}: alpha must be finite"));
                }
                if let Some(w) = weights {
                    check_vec(n, w, &format!("{what} weights"))?;
                }
                if let Some(s) = shifts {
                    check_vec(n, s, &format!("{what} shifts"))?;
                }
            }
        }
    }
    Ok(pf)
}

fn polynomial(n: usize, terms: &[Term]) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for t in terms {
        p.add_term(Monomial::new(t.exps.clone()), t.coef);
    }
    p
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<Problem, InputError> {
        let n = self.n;
        let bounds = match &self.bounds {
            Some(b) => BoxDomain::new(b.iter().map(|x| x[0]).collect(), b.iter().map(|x| x[1]).collect())
                .map_err(|e| InputError(e.to_string()))?,
            None => BoxDomain::unit(n),
        };
        let mut problem =
            Problem::new(polynomial(n, &self.objective), bounds).map_err(|e| InputError(e.to_string()))?;
        for c in &self.constraints {
            problem.constraints.push(match c {
                ConstraintSpec::Linear { a, b } => Constraint::Linear { a: a.clone(), b: *b },
                ConstraintSpec::Polynomial { terms } => Constraint::Polynomial(polynomial(n, terms)),
                ConstraintSpec::LogSumExp { alpha, weights, shifts } => Constraint::LogSumExp {
                    weights: weights.clone().unwrap_or_else(|| vec![1.0; n]),
                    shifts: shifts.clone().unwrap_or_else(|| vec![0.0; n]),
                    alpha: *alpha,
                },
            });
        }
        Ok(problem)
    }
}
