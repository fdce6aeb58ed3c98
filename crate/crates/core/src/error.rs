use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mismatched cell sets: {0}")]
    Mismatch(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("fit needs at least two distinct levels with nonzero counts: {0}")]
    Fit(String),

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
