//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// The variants split into input errors (bad spec, bad parameters, shape
/// mismatches) and numerical failures (divergent integrals, exhausted
/// budgets, singular matrices). The CLI maps the former to exit code 2 and
/// the latter to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown density family: {0}")]
    UnknownFamily(String),

    #[error("invalid density spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("integration did not converge: {0}")]
    NotConverged(String),

    #[error("integrand produced NaN at {0:?}")]
    NanIntegrand(Vec<f64>),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("unbounded support: {0}")]
    UnboundedSupport(String),

    #[error("density is not normalized: {0}")]
    NotNormalized(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the
    /// numerics (used by the CLI to pick exit code 2 vs 3).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownFamily(_)
                | Error::InvalidSpec(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidParameter(_)
                | Error::UnboundedSupport(_)
                | Error::NotNormalized(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
