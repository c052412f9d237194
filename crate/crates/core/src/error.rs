use std::path::PathBuf;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("reference error: {0}")]
    Reference(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph is disconnected (component sizes {sizes:?}); rerun with --largest-component to analyse the largest one")]
    Disconnected { sizes: Vec<usize> },

    #[error("all attribute vectors are identical, so the distance spread is zero")]
    DegenerateSigma,

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 usage, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) => 2,
            Error::Parse { .. }
            | Error::UnknownNode(_)
            | Error::Reference(_)
            | Error::Size(_)
            | Error::Disconnected { .. }
            | Error::Shape { .. }
            | Error::Io { .. }
            | Error::Json(_) => 3,
            Error::DegenerateSigma | Error::Metric(_) | Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
