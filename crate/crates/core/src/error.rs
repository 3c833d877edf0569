// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the change point estimators and their inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value {value} at row {row}, column {column}")]
    NonFinite {
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("index sets overlap at observation {0}")]
    OverlappingSets(usize),
    #[error("index {index} out of range for {len} observations")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("initial membership is not contiguous: label {label} reappears at position {position}")]
    NonContiguousMembership { label: i64, position: usize },
    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
