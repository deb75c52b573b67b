use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] splitfft::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

impl BenchError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            BenchError::Core(splitfft::Error::Resource(_)) => EXIT_RESOURCE,
            BenchError::Io(_) | BenchError::Csv(_) => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        })
    }
}
