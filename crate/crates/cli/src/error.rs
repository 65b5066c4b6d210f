use std::fmt;

/// A failure reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<plangen::Error> for CliError {
    fn from(e: plangen::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("json", e.to_string())
    }
}
