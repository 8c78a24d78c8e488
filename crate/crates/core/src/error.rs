use std::io;
use std::path::PathBuf;

use crate::pe::OverflowReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid tensor `{name}`: {reason}")]
    InvalidTensor { name: String, reason: String },

    #[error("value {value} is not exactly representable in {format}")]
    NotRepresentable { value: f64, format: String },

    #[error("malformed data at byte offset {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("posit code {code:#x} is NaR (not a real)")]
    NotAReal { code: u16 },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("{context}: {source}")]
    Layer {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Overflow(Box<OverflowReport>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("i/o: {0}")]
    Stream(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a layer or tensor name to an error.
    pub fn in_layer(self, name: &str) -> Self {
        Error::Layer {
            context: format!("layer `{name}`"),
            source: Box::new(self),
        }
    }

    /// True for errors that stem from a simulated datapath overflow.
    pub fn is_overflow(&self) -> bool {
        match self {
            Error::Overflow(_) => true,
            Error::Layer { source, .. } => source.is_overflow(),
            _ => false,
        }
    }
}
