use thiserror::Error;

pub type Result<T> = std::result::Result<T, JuiceError>;

#[derive(Debug, Error)]
pub enum JuiceError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("covariance set required for mode {0}")]
    MissingCovariance(&'static str),

    #[error("non-finite iterate at outer {outer}, inner {inner}")]
    NonFinite { outer: usize, inner: usize },

    #[error("linear system is numerically singular: {0}")]
    Singular(&'static str),

    #[error("covariance matrix for UE {0} is not positive semidefinite")]
    NotPsd(usize),

    #[error("empty support")]
    EmptySupport,

    #[error("metric undefined: {0}")]
    Metric(&'static str),

    #[error("{path}:{line}: {msg}")]
    Spec { path: String, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
