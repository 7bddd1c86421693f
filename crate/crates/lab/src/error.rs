//! Command-level errors mapped to distinct process exit codes.

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    /// Malformed or inconsistent configuration (exit 2).
    Config(anyhow::Error),
    /// Missing or malformed data/model files (exit 3).
    Data(anyhow::Error),
    /// A verification command ran and its checks failed (exit 4).
    Check(String),
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(anyhow::anyhow!(msg.into()))
    }

    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(anyhow::anyhow!(msg.into()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
            AppError::Check(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(e) => write!(f, "config error: {e}"),
            AppError::Data(e) => write!(f, "data error: {e}"),
            AppError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

pub type AppResult<T> = Result<T, AppError>;

/// IO failures while reading/writing run artifacts count as data errors.
pub fn io_data<T>(r: std::io::Result<T>, what: &str) -> AppResult<T> {
    r.map_err(|e| AppError::Data(anyhow::anyhow!("{what}: {e}")))
}
