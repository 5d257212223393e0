use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Invalid configuration or command line; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Failure while running an experiment; exit code 3.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] mdi_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
