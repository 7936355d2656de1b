use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("divergent integral (kernel violates the finiteness condition on lambda_d): {0}")]
    Divergent(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular Gram matrix: {0}")]
    Singular(String),

    #[error("duplicate points: {0}")]
    Duplicate(String),

    #[error("no linearly independent degree up to m_max = {m_max}; try a larger m_max")]
    NoIndependentDegree { m_max: usize },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("optimizer failed: {0}")]
    Optimization(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
