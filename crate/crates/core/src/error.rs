use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha out of range: {0} (must lie in (0,1))")]
    AlphaOutOfRange(f64),
    #[error("alpha is only meaningful for the pareto-sphere family")]
    AlphaNotAllowed,
    #[error("pareto-sphere family requires alpha")]
    AlphaMissing,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("exact oracle capped at 5 points (got {0})")]
    ExactTooLarge(usize),
    #[error("{kind} metric requires a subordinator sample")]
    MissingSample { kind: &'static str },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors caused by bad user input rather than by the run itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::AlphaOutOfRange(_)
                | Error::AlphaNotAllowed
                | Error::AlphaMissing
                | Error::ZeroDimension
                | Error::Config(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
