use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid data: {0}")]
    Validation(String),

    #[error("unknown material `{0}`")]
    NotFound(String),

    #[error("vessel `{vessel}` would hold {requested:.6} L of liquid but its capacity is {capacity:.6} L")]
    CapacityExceeded {
        vessel: String,
        requested: f64,
        capacity: f64,
    },

    #[error("cannot dissolve `{0}`: the vessel holds no solvent")]
    NoSolventPresent(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("integrator took {steps} steps without covering the requested interval")]
    StepLimitExceeded { steps: usize },

    #[error("vessel `{0}` is empty")]
    EmptyVessel(String),

    #[error("unknown characterization method `{0}`")]
    UnknownMethod(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("episode is done; call reset first")]
    EpisodeDone,

    #[error("action index {index} out of range (action space has {size} choices)")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Builds a parse error from a TOML failure, locating the offending line.
    pub(crate) fn from_toml(text: &str, err: toml::de::Error) -> Self {
        let line = err
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Parse {
            line,
            message: err.message().to_string(),
        }
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            message: err.to_string(),
        }
    }
}
