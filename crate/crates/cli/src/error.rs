use std::fmt;

use serde::Serialize;

/// A failure reported as `{"error": code, "message": ...}` on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    #[serde(rename = "error")]
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn spec(message: impl Into<String>) -> Self {
        CliError::new("invalid_spec", message)
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::new("io_error", format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl From<jetflow_core::Error> for CliError {
    fn from(e: jetflow_core::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
