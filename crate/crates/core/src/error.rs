use thiserror::Error;

/// Errors raised by model construction, estimation and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is singular to working precision (reciprocal condition {rcond:.3e})")]
    Singular { rcond: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("degenerate trial set: {0}")]
    Degenerate(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn shape_mismatch(
    context: &'static str,
    expected: (usize, usize),
    actual: (usize, usize),
) -> Error {
    Error::DimensionMismatch {
        context,
        expected: format!("{}x{}", expected.0, expected.1),
        actual: format!("{}x{}", actual.0, actual.1),
    }
}
