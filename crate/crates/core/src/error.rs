use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// One failed check found while validating a building model.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Entity the breach belongs to, e.g. `surface 'Z01-floor'`.
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{kind} '{name}' referenced by {referrer} does not exist")]
    UnknownReference {
        kind: &'static str,
        name: String,
        referrer: String,
    },

    #[error("model validation failed:\n{}", list_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("weather data line {line}: {message}")]
    WeatherRow { line: usize, message: String },

    #[error("weather series: {0}")]
    Weather(String),

    #[error("configuration: {0}")]
    Configuration(String),

    #[error("numerical configuration: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("design day did not reach a periodic state within {cycles} cycles")]
    NonConvergent { cycles: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn list_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input documents rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::UnknownReference { .. }
                | Error::Validation(_)
                | Error::WeatherRow { .. }
                | Error::Weather(_)
                | Error::Configuration(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
