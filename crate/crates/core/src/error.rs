use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (shapes, lengths, ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Request is well-formed but beyond what the implementation supports.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A numerical routine failed (singular system, non-finite value).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed file content, with the 1-based record (line) index.
    #[error("parse error at record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Failure in one method or timestep of an experiment.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(record: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            record,
            message: msg.into(),
        }
    }

    /// Wrap this error with a human-readable context label.
    pub fn context(self, ctx: impl Into<String>) -> Self {
        Error::Context {
            context: ctx.into(),
            source: Box::new(self),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse(0, format!("{other:?}")),
        }
    }
}
