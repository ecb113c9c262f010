use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no convergence: value {value:e}, error estimate {err_estimate:e}")]
    NonConvergence { value: f64, err_estimate: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("simulation failed: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, FlowError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FlowError::Domain(msg.into()))
}
