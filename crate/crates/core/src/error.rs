use thiserror::Error;

/// Errors produced by the detection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular or not positive definite (pivot {pivot:.3e} at index {index})")]
    Singular { index: usize, pivot: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unsupported modulation order {0} (expected 4, 16, 64 or 256)")]
    Modulation(usize),

    #[error("value {0} is not a level of the constellation")]
    NotOnConstellation(f64),

    #[error("search space of {size} candidates exceeds the exhaustive-search limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error("unsupported transform: {0}")]
    UnsupportedTransform(String),

    #[error("degenerate channel: eigenvalue statistic {0:.3e} too small to estimate a radius")]
    DegenerateChannel(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed channel trace: {0}")]
    Trace(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
