use thiserror::Error;

/// Errors raised when a model function is evaluated outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("invalid {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error(
        "instance too large for exhaustive enumeration: {profiles} profiles exceeds limit {limit}"
    )]
    TooLarge { profiles: u128, limit: u128 },
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, requirement: &'static str, value: f64) -> Self {
        ModelError::Domain {
            name,
            requirement,
            value,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Invalid {
            name,
            reason: reason.into(),
        }
    }
}

/// Errors raised while loading or validating an experiment description.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("field `{path}`: {message}")]
    Field { path: String, message: String },
}

impl ConfigError {
    pub(crate) fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Top-level error for experiment execution. Splits configuration problems
/// from domain errors hit while evaluating the model.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("domain error: {0}")]
    Model(#[from] ModelError),
    #[error("failed to write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
