// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Exit code 1: unreadable or malformed input.
pub const EXIT_FORMAT: u8 = 1;
/// Exit code 2: infeasible or invalid request.
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn format(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FORMAT,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<stego_core::Error> for CliError {
    fn from(e: stego_core::Error) -> Self {
        let code = if e.is_format_or_io() {
            EXIT_FORMAT
        } else {
            EXIT_INVALID
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::format(format!("I/O error: {e}"))
    }
}
