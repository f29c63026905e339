//! Conic program IR, a reference operator-splitting solver for zero,
//! nonnegative and PSD cones, residual validation, and CBF / SDPA writers.

pub mod analytic;
mod cbf;
mod cones;
mod error;
mod program;
mod sdpa;
mod solver;
mod standard;
mod validate;

pub use cbf::{export_cbf, parse_cbf};
pub use cones::min_eigenvalue;
pub use error::ConicError;
pub use program::{Cone, ConeBlock, ConicProgram, LinExpr, VarId};
pub use sdpa::export_sdpa;
pub use solver::{solve_reference, ConicSolution, SolveStatus, SolverOptions};
pub use validate::{certified_lower_bound, residual_report, validate_solution, ResidualReport};
