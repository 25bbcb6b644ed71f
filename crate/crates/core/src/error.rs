use thiserror::Error;

/// Errors raised by the test statistics, samplers and simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HdSignError {
    #[error("n must be at least {required} (got {actual})")]
    TooFewObservations { required: usize, actual: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("data length {len} is not n*p = {n}*{p}")]
    ShapeMismatch { n: usize, p: usize, len: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("weight function is not finite at row {row} (radius {radius})")]
    NonFiniteWeight { row: usize, radius: f64 },

    #[error("variance estimate is zero; the standardized statistic is undefined")]
    DegenerateVariance,

    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("no closed-form efficiency is available for {0}")]
    UnsupportedFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{degenerate} of {replications} replications had a degenerate variance")]
    TooManyDegenerate { degenerate: usize, replications: usize },

    #[error("cannot parse weight expression {expr:?}: {reason}")]
    WeightExpression { expr: String, reason: String },
}

pub type Result<T> = std::result::Result<T, HdSignError>;
