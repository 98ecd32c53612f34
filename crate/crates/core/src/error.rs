use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state space or enumeration exceeds its configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Arguments are outside the admissible domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The operation is not implemented for this input shape.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A rate model cannot be used the way it was asked to.
    #[error("rate model error: {0}")]
    Model(String),
    /// A caller-supplied object violates its documented contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Not enough samples to form the requested estimate.
    #[error("statistical error: {0}")]
    Statistical(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
