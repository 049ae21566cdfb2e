use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps these onto exit codes: `Usage` → 1, data errors → 2,
/// numerical failures → 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("system of {n} qubits exceeds the cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error at {path}: {message}")]
    Json { path: String, message: String },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures caused by non-finite values or solver breakdown.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    /// True for failures caused by malformed or inconsistent input data.
    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::InvalidGraph(_) | Error::Data(_) | Error::Io { .. } | Error::Json { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
