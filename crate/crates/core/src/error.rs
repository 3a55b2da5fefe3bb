use thiserror::Error;

/// Errors raised by mesh construction, kernel evaluation and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("fixed-point iteration did not converge at step {step} (last update {residual:e})")]
    NonConvergence { step: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        invalid(format!("alpha must lie in (0,1), got {alpha}"))
    }
}

pub(crate) fn check_alpha_closed(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        invalid(format!("alpha must lie in (0,1], got {alpha}"))
    }
}
