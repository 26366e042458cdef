use thiserror::Error;

/// Errors surfaced by the library. Variants map onto the CLI exit codes:
/// invalid input is a configuration error, certificate and consistency
/// failures are reported as such, limits as resource errors.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("precision failure: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
