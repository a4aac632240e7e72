use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::imgcore::ImageError;
use crate::metrics::MetricsError;
use crate::policies::PolicyError;
use crate::shiftgen::ShiftError;
use crate::stain::StainError;
use crate::transforms::TransformError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error. Every module error converts into it, and each variant
/// maps onto one of the stable process exit codes used by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Stain(#[from] StainError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{} of {total} inputs failed (first: {}: {})", failures.len(), failures[0].item, failures[0].message)]
    Failures { total: usize, failures: Vec<Failure> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// One failed input of a batch operation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub item: String,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(item: impl Into<String>, err: &Error) -> Self {
        Self {
            item: item.into(),
            kind: err.kind(),
            message: err.to_string(),
        }
    }
}

/// Coarse error classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Data,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 2,
            ErrorClass::Data => 3,
            ErrorClass::Internal => 4,
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Transform(_) | Error::Policy(_) | Error::InvalidArgument(_) => {
                ErrorClass::Validation
            }
            Error::Image(e) => match e {
                ImageError::DegenerateAffine | ImageError::InvalidDimensions { .. } => {
                    ErrorClass::Validation
                }
                _ => ErrorClass::Data,
            },
            Error::Stain(e) => match e {
                StainError::InvalidModel(_) | StainError::InvalidAdjustment { .. } => {
                    ErrorClass::Validation
                }
                _ => ErrorClass::Data,
            },
            Error::Shift(e) => e.class(),
            Error::Metrics(e) => match e {
                MetricsError::AxisMismatch { .. } => ErrorClass::Validation,
                _ => ErrorClass::Data,
            },
            Error::Io { .. } | Error::Json { .. } | Error::Failures { .. } => ErrorClass::Data,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }

    /// Short machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Image(e) => e.kind(),
            Error::Transform(e) => e.kind(),
            Error::Stain(e) => e.kind(),
            Error::Policy(_) => "InvalidPolicy",
            Error::Shift(e) => e.kind(),
            Error::Metrics(e) => e.kind(),
            Error::Io { .. } => "Io",
            Error::Failures { failures, .. } => {
                if failures.iter().all(|f| f.kind == failures[0].kind) {
                    failures[0].kind
                } else {
                    "MultipleFailures"
                }
            }
            Error::Json { .. } => "InvalidJson",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Internal(_) => "Internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}
