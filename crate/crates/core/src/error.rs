use thiserror::Error;

use crate::taxonomy::IntentLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("unsupported intent: {0}")]
    UnsupportedIntent(IntentLabel),

    #[error("format version mismatch for {artifact}: expected {expected}, found {found}")]
    FormatVersion {
        artifact: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad input rather than by the toolkit.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
