use std::path::PathBuf;

/// Errors raised by the toolkit. Each variant maps onto one CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input. `path` is a JSON pointer when the
    /// problem was found while reading a file, otherwise a short locator.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// An exact routine refused to run because the input is too large.
    #[error("capacity exceeded: {what} is {size}, cap is {cap}")]
    Capacity {
        what: String,
        size: usize,
        cap: usize,
    },

    /// Lexicographic BFS produced an order whose check failed: `a` and `b`
    /// are later neighbours of `node` that are not adjacent.
    #[error("graph is not chordal: later neighbours {a} and {b} of {node} are not adjacent")]
    NotChordal { node: String, a: String, b: String },

    #[error("bid graph has no orientation attached")]
    MissingOrientation,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("verification failed: {0}")]
    Violation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn capacity(what: impl Into<String>, size: usize, cap: usize) -> Self {
        Error::Capacity {
            what: what.into(),
            size,
            cap,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::MissingOrientation | Error::Unsupported(_) => 2,
            Error::Capacity { .. } => 3,
            Error::NotChordal { .. } => 4,
            Error::Violation(_) => 5,
            Error::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
