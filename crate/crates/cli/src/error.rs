use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {message}")]
    Resolve {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] merlab_core::Error),
}

impl CliError {
    /// 3 for a resource-ceiling abort, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(merlab_core::Error::ResourceCeiling { .. }) => 3,
            _ => 2,
        }
    }
}
