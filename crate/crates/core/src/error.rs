use thiserror::Error;

pub type Result<T> = std::result::Result<T, OcoError>;

#[derive(Debug, Error)]
pub enum OcoError {
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("missing curvature constant `{0}`")]
    MissingConstant(&'static str),

    #[error("input outside the domain: {0}")]
    OutOfDomain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {reason}")]
    Parse { path: String, reason: String },
}

impl OcoError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        OcoError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
