use thiserror::Error;

use crate::scalar::ParseRealError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The map was evaluated exactly at one of its poles.
    #[error("evaluation at pole {pole_index} (beta = {pole})")]
    PoleEvaluation { pole_index: usize, pole: String },

    /// Outward bracket expansion on an unbounded branch did not reach the target.
    #[error("bracket expansion on branch {branch} gave up after {doublings} doublings")]
    BracketFailure { branch: usize, doublings: u32 },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("epsilon {eps} too large (must be below {limit})")]
    EpsilonTooLarge { eps: String, limit: String },

    #[error("budget exceeded: {what} needs {requested}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("invalid {field}: {message}")]
    InvariantViolation { field: &'static str, message: String },

    #[error(transparent)]
    Parse(#[from] ParseRealError),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn invariant(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvariantViolation {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn exhausted(message: impl Into<String>) -> Self {
        Error::PrecisionExhausted(message.into())
    }

    pub fn is_precision_exhausted(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}
