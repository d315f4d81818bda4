use thiserror::Error;

/// Error categories shared by every module.
///
/// The CLI maps the [`Error::is_config`] kinds to exit code 2, `Analysis` to 1
/// and everything else to 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("uniqueness violation: {0}")]
    Uniqueness(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Precondition(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
