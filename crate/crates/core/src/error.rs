use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Every variant renders as a single line prefixed with the component that
/// failed, so the CLI can forward the message verbatim.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on caller-supplied data or parameters was violated.
    #[error("{component}: input error: {message}")]
    Input {
        component: &'static str,
        message: String,
    },

    /// A file could not be parsed.
    #[error("{component}: format error: {path}:{line}: {message}")]
    Format {
        component: &'static str,
        path: String,
        line: usize,
        message: String,
    },

    /// The computation is undefined for the given (valid) data, e.g. a
    /// correlation over a constant vector.
    #[error("{component}: numerical error: {message}")]
    Numerical {
        component: &'static str,
        message: String,
    },

    /// A similarity metric failed inside a composite comparison.
    #[error("compare: metric {metric}: {source}")]
    Metric {
        metric: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{component}: run error: {message}")]
    Run {
        component: &'static str,
        message: String,
    },

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn input(component: &'static str, message: impl Into<String>) -> Self {
        Error::Input {
            component,
            message: message.into(),
        }
    }

    pub fn numerical(component: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical {
            component,
            message: message.into(),
        }
    }

    pub fn run(component: &'static str, message: impl Into<String>) -> Self {
        Error::Run {
            component,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn metric(metric: &'static str, source: Error) -> Self {
        Error::Metric {
            metric,
            source: Box::new(source),
        }
    }

    /// True for errors caused by bad input data, arguments or files, as
    /// opposed to failures during the computation itself.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Input { .. } | Error::Format { .. } => true,
            Error::Metric { source, .. } => source.is_input(),
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::Numerical { .. } | Error::Run { .. } => false,
        }
    }
}
