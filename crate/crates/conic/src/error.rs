use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("cone `{cone}` is not supported by {consumer}; {hint}")]
    UnsupportedCone {
        cone: String,
        consumer: &'static str,
        hint: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
