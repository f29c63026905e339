//! Problem data: a polynomial objective over a box with optional linear,
//! polynomial and log-sum-exp constraints.

use crate::poly::{BoxDomain, Polynomial};
use crate::SlcError;

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `aᵀx ≤ b`.
    Linear { a: Vec<f64>, b: f64 },
    /// `p(x) ≤ 0`.
    Polynomial(Polynomial),
    /// `log Σ_i exp(w_i x_i + s_i) ≤ alpha`.
    LogSumExp {
        weights: Vec<f64>,
        shifts: Vec<f64>,
        alpha: f64,
    },
}

impl Constraint {
    pub fn log_sum_exp(n: usize, alpha: f64) -> Self {
        Constraint::LogSumExp {
            weights: vec![1.0; n],
            shifts: vec![0.0; n],
            alpha,
        }
    }

    /// Positive part of the constraint function at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = match self {
            Constraint::Linear { a, b } => a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b,
            Constraint::Polynomial(p) => p.eval(x),
            Constraint::LogSumExp { weights, shifts, alpha } => {
                let z: Vec<f64> = x
                    .iter()
                    .zip(weights.iter().zip(shifts))
                    .map(|(xi, (w, s))| w * xi + s)
                    .collect();
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + z.iter().map(|zi| (zi - m).exp()).sum::<f64>().ln() - alpha
            }
        };
        v.max(0.0)
    }

    /// Constraint function value and gradient.
    pub fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Constraint::Linear { a, b } => (a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b, a.clone()),
            Constraint::Polynomial(p) => (p.eval(x), p.grad(x)),
            Constraint::LogSumExp { weights, shifts, alpha } => {
                let z: Vec<f64> = x
                    .iter()
                    .zip(weights.iter().zip(shifts))
                    .map(|(xi, (w, s))| w * xi + s)
                    .collect();
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|zi| (zi - m).exp()).collect();
                let s: f64 = e.iter().sum();
                let g = e.iter().zip(weights).map(|(ei, w)| w * ei / s).collect();
                (m + s.ln() - alpha, g)
            }
        }
    }

    /// The same constraint after substituting `x = shift + scale ∘ t`.
    pub fn substitute(&self, shift: &[f64], scale: &[f64]) -> Constraint {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear {
                a: a.iter().zip(scale).map(|(ai, s)| ai * s).collect(),
                b: b - a.iter().zip(shift).map(|(ai, l)| ai * l).sum::<f64>(),
            },
            Constraint::Polynomial(p) => Constraint::Polynomial(p.affine_substitute(shift, scale)),
            Constraint::LogSumExp { weights, shifts, alpha } => Constraint::LogSumExp {
                weights: weights.iter().zip(scale).map(|(w, s)| w * s).collect(),
                shifts: shifts
                    .iter()
                    .zip(weights.iter().zip(shift))
                    .map(|(s0, (w, l))| s0 + w * l)
                    .collect(),
                alpha: *alpha,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub bounds: BoxDomain,
    pub objective: Polynomial,
    pub constraints: Vec<Constraint>,
}

impl Problem {
    pub fn new(objective: Polynomial, bounds: BoxDomain) -> Result<Self, SlcError> {
        if bounds.dim() != objective.n() {
            return Err(SlcError::Dimension {
                expected: objective.n(),
                got: bounds.dim(),
            });
        }
        bounds.check()?;
        Ok(Self {
            bounds,
            objective,
            constraints: Vec::new(),
        })
    }

    /// Objective over the unit box.
    pub fn unit(objective: Polynomial) -> Self {
        let n = objective.n();
        Self {
            bounds: BoxDomain::unit(n),
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    /// Largest degree among the objective and polynomial constraints.
    pub fn degree(&self) -> u32 {
        self.constraints
            .iter()
            .filter_map(|c| match c {
                Constraint::Polynomial(p) => Some(p.degree()),
                _ => None,
            })
            .fold(self.objective.degree(), u32::max)
    }

    pub fn polynomial_constraints(&self) -> impl Iterator<Item = &Polynomial> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::Polynomial(p) => Some(p),
            _ => None,
        })
    }

    pub fn has_log_sum_exp(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| matches!(c, Constraint::LogSumExp { .. }))
    }

    /// The same problem restricted to `sub`.
    pub fn restricted(&self, sub: &BoxDomain) -> Problem {
        Problem {
            bounds: sub.clone(),
            objective: self.objective.clone(),
            constraints: self.constraints.clone(),
        }
    }

    /// Rewrites the problem over the unit box: `x = lower + width ∘ t`.
    pub fn normalized(&self) -> Result<Problem, SlcError> {
        self.bounds.check()?;
        let w = self.bounds.widths();
        let l = &self.bounds.lower;
        Ok(Problem {
            bounds: BoxDomain::unit(self.n()),
            objective: self.objective.affine_box_transform(&self.bounds)?,
            constraints: self.constraints.iter().map(|c| c.substitute(l, &w)).collect(),
        })
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v = 0.0f64;
        for (xi, (l, u)) in x.iter().zip(self.bounds.lower.iter().zip(&self.bounds.upper)) {
            v = v.max(l - xi).max(xi - u);
        }
        for c in &self.constraints {
            v = v.max(c.violation(x));
        }
        v
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }
}
