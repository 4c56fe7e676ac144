use thiserror::Error;

/// Errors raised by the evaluators, builders and the suite registry.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("descriptor error: {0}")]
    Descriptor(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("registry error: unknown suite `{0}`")]
    Registry(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable kind, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Structure(_) => "structure",
            Error::Descriptor(_) => "descriptor",
            Error::Precondition(_) => "precondition",
            Error::Registry(_) => "registry",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
