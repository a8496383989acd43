// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or truncated file contents.
    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// An argument or value outside its documented domain.
    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("infeasible payload: {0}")]
    Infeasible(String),

    #[error(
        "payload search did not converge after {iterations} steps (residual {residual:e} bits)"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("message of {message} bits does not fit into {cover} cover elements")]
    MessageTooLong { message: usize, cover: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// True for errors caused by unreadable input rather than by values the
    /// input describes.
    pub fn is_format_or_io(&self) -> bool {
        matches!(self, Error::Format(_) | Error::Io(_))
    }
}
