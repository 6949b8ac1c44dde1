use std::path::PathBuf;

/// Errors surfaced by the harness, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] roger_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("trial seed {seed} diverged at episode {episode}; partial log written to {log}")]
    Diverged {
        seed: u64,
        episode: usize,
        log: PathBuf,
    },
    #[error("sweep needs {needed} trials but the budget is {budget}")]
    Budget { needed: usize, budget: usize },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Budget { .. } => 2,
            Self::Core(roger_core::Error::Config(_)) => 2,
            Self::Diverged { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
