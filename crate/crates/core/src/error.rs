use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("combinatorial ceiling exceeded: k*m = {km} > {ceiling}")]
    CeilingExceeded { km: u32, ceiling: u32 },
    #[error("boundary regime H*(d) = 1/2 is excluded: {0}")]
    Boundary(String),
    #[error("no finite truncation order: {0}")]
    NoFiniteOrder(String),
    #[error("chaos rank indeterminate: {0}")]
    Indeterminate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kernel validation failed: {0}")]
    KernelInvalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("bad format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
