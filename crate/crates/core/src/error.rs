//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A model or layer specification is malformed.
    InvalidSpec(String),
    /// A configuration value is out of range.
    InvalidConfig(String),
    /// An operation that needs data received none.
    EmptyData,
    /// Input length does not match the expected dimension.
    DimMismatch { expected: usize, got: usize },
    InvalidPartition(String),
    InvalidPwl(String),
    /// Models passed together do not share the required structure.
    ModelMismatch(String),
    /// Regression/log-fit domain error (nonpositive values, too few points).
    FitDomain(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(m) => write!(f, "invalid spec: {m}"),
            Error::InvalidConfig(m) => write!(f, "invalid config: {m}"),
            Error::EmptyData => write!(f, "empty data"),
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidPartition(m) => write!(f, "invalid partition: {m}"),
            Error::InvalidPwl(m) => write!(f, "invalid piecewise-linear function: {m}"),
            Error::ModelMismatch(m) => write!(f, "model mismatch: {m}"),
            Error::FitDomain(m) => write!(f, "fit domain error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
