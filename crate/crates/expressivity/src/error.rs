//! Crate-wide error type and process exit-code mapping.

use thiserror::Error;

/// Errors raised by the estimator, data layer, and command implementations.
///
/// Variants map onto the process exit codes documented on
/// [`Error::exit_code`]: configuration misuse exits 1, anything wrong with
/// input data or files exits 2, and numeric failures during training exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape or length mismatch between operands.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Input values violate a documented precondition.
    #[error("data error: {0}")]
    Data(String),

    /// A file does not follow its documented layout.
    #[error("format error: {0}")]
    Format(String),

    /// An attribute column violates its declared encoding.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// A minibatch is too small to be usable.
    #[error("batch error: {0}")]
    Batch(String),

    /// A generator or estimator parameter is outside its valid range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Training produced non-finite values or diverged.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The caller invoked an operation incorrectly.
    #[error("usage error: {0}")]
    Usage(String),

    /// A file could not be read or written.
    #[error("io error: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O failure with the path it occurred on.
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Prefixes the message with `context` while keeping the variant, so
    /// the exit code survives annotation. The path of an I/O error is
    /// prefixed instead of its message.
    pub fn with_context(self, context: impl AsRef<str>) -> Self {
        let ctx = context.as_ref();
        let wrap = |msg: String| format!("{ctx}: {msg}");
        match self {
            Error::Dimension(m) => Error::Dimension(wrap(m)),
            Error::Data(m) => Error::Data(wrap(m)),
            Error::Format(m) => Error::Format(wrap(m)),
            Error::Encoding(m) => Error::Encoding(wrap(m)),
            Error::Batch(m) => Error::Batch(wrap(m)),
            Error::Parameter(m) => Error::Parameter(wrap(m)),
            Error::Numeric(m) => Error::Numeric(wrap(m)),
            Error::Usage(m) => Error::Usage(wrap(m)),
            Error::Io { path, source } => Error::Io {
                path: wrap(path),
                source,
            },
        }
    }

    /// Process exit code for this error: 1 for usage and parameter problems,
    /// 2 for data, format, and I/O problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parameter(_) => 1,
            Error::Dimension(_)
            | Error::Data(_)
            | Error::Format(_)
            | Error::Encoding(_)
            | Error::Batch(_)
            | Error::Io { .. } => 2,
            Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
