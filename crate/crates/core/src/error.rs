use std::path::PathBuf;

use crate::corpus::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("serialized recipe: {0}")]
    Parse(#[from] ParseError),
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("training diverged: {0}")]
    NonFinite(String),
    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedLine { .. } => "malformed_line",
            Error::Parse(_) => "parse",
            Error::Lexicon(_) => "lexicon",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EmptyInput(_) => "empty_input",
            Error::NonFinite(_) => "non_finite",
            Error::ModelFormat(_) => "model_format",
        }
    }
}
