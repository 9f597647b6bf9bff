use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the matching pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("value outside the function domain: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("map has no free space")]
    EmptyMap,

    #[error("area graph is empty")]
    EmptyGraph,

    #[error("no rotation hypotheses to cluster")]
    NoHypotheses,

    #[error("matching failed: {0}")]
    MatchFailed(crate::transform::MatchDiagnostics),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
