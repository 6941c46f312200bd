use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown landmark `{name}` for topology {topology}")]
    UnknownLandmark { name: String, topology: String },

    #[error("landmark {landmark} missing from frame at t={t}s")]
    MissingLandmark { landmark: String, t: f64 },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("frame timestamps not strictly increasing: t={t}s follows t={prev}s")]
    Ordering { prev: f64, t: f64 },

    #[error("{0}")]
    Registry(String),

    #[error("unusable recording: {0}")]
    UnusableRecording(String),

    #[error("degenerate segment at t={t}s: endpoint distance {length:e} below {eps:e}")]
    DegenerateSegment { t: f64, length: f64, eps: f64 },

    #[error("decomposition infeasible: series of {len} samples is shorter than 2 x period {period}")]
    DecompositionInfeasible { len: usize, period: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ICC undefined: {0}")]
    UndefinedIcc(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    /// Displays the whole chain itself, so it reports no separate source.
    #[error("{context}: {inner}")]
    Context { context: String, inner: Box<Error> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a human-readable prefix such as the movement or subject it
    /// was raised for.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            inner: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { inner, .. } => inner.root(),
            other => other,
        }
    }
}
