use thiserror::Error;

use crate::allocation::TrialState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or observation lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    UnsupportedVariant(String),

    /// Quadrature or series evaluation failed to reach the requested accuracy.
    #[error("numeric error: {message} (achieved error estimate {achieved:e})")]
    Numeric { message: String, achieved: f64 },

    /// A trial did not cross either boundary within the step cap.
    #[error("trial did not terminate within {cap} steps (n_x = {}, n_y = {})", .state.n_x, .state.n_y)]
    NonTermination { cap: u64, state: Box<TrialState> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
