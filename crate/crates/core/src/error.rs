use std::fmt;

use thiserror::Error;

/// One problem found while validating a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    /// Dotted key path, e.g. `adversary.fraction`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error in {record}: {message}")]
    Parse { record: String, message: String },

    #[error("duplicate record: {0}")]
    DuplicateRecord(String),

    #[error("topology is empty")]
    EmptyTopology,

    #[error("impossible observation: {0}")]
    ImpossibleObservation(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration invalid:\n{}", format_violations(.0))]
    Config(Vec<ConfigViolation>),

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn in_run(self, run: usize) -> Self {
        Error::Run {
            run,
            source: Box::new(self),
        }
    }

    /// True for errors caused by the user's configuration rather than by the computation.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
