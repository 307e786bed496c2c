use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// An iterative solver hit its cap; carries the best residual reached.
    #[error("solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("at iteration {k}: {source}")]
    AtIteration {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("insufficient data: {usable} usable points, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("diagnostics sink failed: {0}")]
    Sink(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_iteration(self, k: usize) -> Self {
        Error::AtIteration {
            k,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
