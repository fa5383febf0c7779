use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("channel count mismatch: expected {expected}, got {actual}")]
    ChannelCount { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// A singular value fell at or below the relative floor.
    #[error("singular value d[{index}] = {value:e} is at or below floor {floor:e}")]
    Singular { index: usize, value: f64, floor: f64 },

    #[error("SVD did not converge after {sweeps} sweeps (off-diagonal {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid lambda {0}: must be positive and finite")]
    Lambda(f64),

    #[error("invalid attack: {0}")]
    Attack(String),

    #[error("{metric} is undefined for constant images")]
    Degenerate { metric: &'static str },

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse error classes used for process exit codes and foreign error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Lambda(_) | Error::Attack(_) | Error::Config(_) => ErrorClass::Usage,
            Error::Dimension(_)
            | Error::ChannelCount { .. }
            | Error::Format(_)
            | Error::Io(_) => ErrorClass::Data,
            Error::NonFinite { .. }
            | Error::Singular { .. }
            | Error::NoConvergence { .. }
            | Error::Degenerate { .. } => ErrorClass::Numeric,
        }
    }

    /// Process exit code: 2 usage, 3 data/format, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Usage => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
