use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: panelsim::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("report contains no systems")]
    EmptyReport,
}

impl CliError {
    pub(crate) fn core(context: impl Into<String>) -> impl FnOnce(panelsim::Error) -> Self {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// True when the input documents or arguments are at fault.
    pub fn is_validation(&self) -> bool {
        match self {
            CliError::Core { source, .. } => source.is_validation(),
            CliError::Json { .. } | CliError::Scenario(_) | CliError::EmptyReport => true,
            CliError::Io { .. } | CliError::Csv { .. } => false,
        }
    }

    /// Process exit code: 1 for validation errors, 2 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
