use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input violates an axiom of the structure (quasimetric, measure, grid).
    #[error("structural violation: {0}")]
    Structural(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("weight value {value} at index {index} is not strictly positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("epsilon {eps} outside the admissible range (0, {max}]")]
    EpsilonOutOfRange { eps: f64, max: f64 },

    #[error("lambda {lambda} is below the decomposition threshold {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
