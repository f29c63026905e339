use slcpop_conic::{ConicError, SolveStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate box: variable x{var} has lower = upper = {value}")]
    DegenerateBox { var: usize, value: f64 },
    #[error("invalid box: variable x{var} has lower {lower} > upper {upper}")]
    InvalidBox { var: usize, lower: f64, upper: f64 },
    #[error("degree {degree} exceeds the cap of {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("degree {degree} is not supported by {what}")]
    UnsupportedDegree { degree: u32, what: &'static str },
    #[error("unsupported constraint: {0}")]
    UnsupportedConstraint(String),
    #[error("solver finished with status {status}")]
    SolverStatus { status: SolveStatus },
    #[error("refusing brute force over {n} variables (limit {limit})")]
    TooManyVariables { n: usize, limit: usize },
    #[error(transparent)]
    Conic(#[from] ConicError),
}
