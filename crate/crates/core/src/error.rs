use thiserror::Error;

/// Errors raised by models, functionals, solvers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or observation lies outside the model's domain (e.g. a non-positive scale).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// NaN during iteration, a singular system, or a diverging optimizer.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
