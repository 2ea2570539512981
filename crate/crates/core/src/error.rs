use thiserror::Error;

/// Errors produced by the simulator and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix or parameter failed validation (e.g. a non-unitary gate).
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested measurement outcome has (numerically) zero probability.
    #[error("impossible outcome {outcome} (probability {probability:e})")]
    ImpossibleOutcome { outcome: usize, probability: f64 },

    /// An eigensolver or other numerical routine did not meet its tolerance.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// The simulated state left the subspace an operation assumes.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
