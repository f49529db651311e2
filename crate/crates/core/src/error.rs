use thiserror::Error;

use crate::pde::GridField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Derivatives of a 1-homogeneous function are not defined at the origin.
    #[error("singular point: {0} is undefined at the origin")]
    SingularPoint(&'static str),

    #[error("unsupported smoothness: {0}")]
    UnsupportedSmoothness(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dual maximization did not converge (best value {best}, bracket [{}, {}])", bracket.0, bracket.1)]
    DualConvergence { best: f64, bracket: (f64, f64) },

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// A profile whose validation failed; carries the measured convexity margin.
    #[error("profile rejected: convexity margin {margin:.3e} ({reason})")]
    ProfileRejected { margin: f64, reason: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("inconsistent parameters: {0}")]
    Inconsistency(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}): {reason}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
        last: Box<GridField>,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
