use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFiniteEntry { index: usize },

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("metric matrix is not symmetric positive definite")]
    InvalidMetric,

    #[error("{name} = {value} is outside [{min}, {max}]")]
    ParameterRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("non-finite {what} at round {round}")]
    NonFinite { what: &'static str, round: usize },

    #[error("invariant failure: {0}")]
    Invariant(String),
}
