use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LameError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("inverse iteration stagnated at shift {shift} (residual {residual:e})")]
    Stagnation { shift: f64, residual: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("root tracking failed: {0}")]
    RootTracking(String),
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, LameError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LameError::Domain(msg.into()))
}
