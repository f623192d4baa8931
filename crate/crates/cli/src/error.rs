use std::fmt;

/// Failure of a pipeline command, split by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, bad configuration or unreadable files (exit 2).
    Validation(String),
    /// A statistic is undefined for otherwise valid input (exit 3).
    Degenerate(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }

    /// Prefixes the message with the stage or file it came from.
    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Degenerate(m) => CliError::Degenerate(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Degenerate(m) => write!(f, "numerical degeneracy: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<savor_core::Error> for CliError {
    fn from(e: savor_core::Error) -> Self {
        match e {
            savor_core::Error::Degenerate(m) => CliError::Degenerate(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
