use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for {num_vars} variables")]
    AxisOutOfRange { axis: usize, num_vars: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    /// The flatness gate refused to develop a curved structure.
    #[error("structure is not flat: |curvature| = {magnitude:e} at {witness:?}")]
    NonFlat { witness: Vec<f64>, magnitude: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
