use thiserror::Error;

/// Errors raised by the functional prediction pipeline.
#[derive(Debug, Error)]
pub enum PfpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PfpError>;

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::error::PfpError::InvalidArgument(format!($($arg)*)) };
}
macro_rules! shape {
    ($($arg:tt)*) => { $crate::error::PfpError::Shape(format!($($arg)*)) };
}
macro_rules! numerical {
    ($($arg:tt)*) => { $crate::error::PfpError::Numerical(format!($($arg)*)) };
}
pub(crate) use {invalid, numerical, shape};
