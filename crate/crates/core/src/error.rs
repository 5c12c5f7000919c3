use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure classes the
/// CLI distinguishes (usage, verification, resource).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource ceiling exceeded: {0}")]
    Resource(String),

    #[error("eigenvalue collision at x0 = {x0}: {first} and {second} share eigenvalue {value}")]
    EigenvalueCollision {
        x0: String,
        first: String,
        second: String,
        value: String,
    },

    #[error("vector outside the domain: {0}")]
    Domain(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("missing data for key `{0}`")]
    MissingData(String),

    #[error("verification failed: {what} (expected {expected}, got {actual})")]
    Verification {
        what: String,
        expected: String,
        actual: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures that mean "the mathematics did not check out", as
    /// opposed to bad arguments.
    pub fn is_verification_failure(&self) -> bool {
        matches!(
            self,
            Error::Verification { .. } | Error::InternalConsistency(_) | Error::Inconsistent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
