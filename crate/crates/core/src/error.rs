use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by the library and the command line.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Valid request the implementation deliberately does not support.
    #[error("capability error: {0}")]
    Capability(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("integrability error: {0}")]
    Integrability(String),
    #[error("planner error: {0}")]
    Planner(String),
    /// Rotation by exactly pi: the logarithm has two principal values.
    #[error("ambiguous rotation logarithm: {0}")]
    Ambiguous(String),
    #[error("singular operator: {0}")]
    Singular(String),
    #[error("shooting did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
