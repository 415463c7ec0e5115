use std::path::PathBuf;

use crate::measurement::MeasurementSeries;
use crate::runner::StreamRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("{}", match .line {
        Some(line) => format!("parse error at line {line}: {msg}"),
        None => format!("parse error: {msg}"),
    })]
    Parse { line: Option<usize>, msg: String },

    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u64),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("execution failed: {0}")]
    Execution(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A sampler failed part-way through a repeated measurement.
    #[error("sampler failed after {} samples: {source}", .partial.len())]
    Sampler {
        source: Box<Error>,
        partial: Box<MeasurementSeries>,
    },

    /// A campaign stream failed; `completed` holds every stream finished before it.
    #[error("campaign aborted at stream {stream} after {} completed streams: {source}", .completed.len())]
    Campaign {
        stream: String,
        source: Box<Error>,
        completed: Vec<StreamRecord>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line: Some(line),
            msg: msg.into(),
        }
    }

    pub(crate) fn parse_unlocated(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            msg: msg.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, looking through sampler and campaign wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Sampler { source, .. } | Error::Campaign { source, .. } => source.root(),
            other => other,
        }
    }
}
