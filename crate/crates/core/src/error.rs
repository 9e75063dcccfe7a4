use thiserror::Error;

/// Errors raised by model construction, evaluation and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("too few exceedances: {found} < {required}")]
    TooFewExceedances { found: usize, required: usize },

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
