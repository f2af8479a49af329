use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("predictor digest mismatch: packet {packet:#010x}, local {local:#010x}")]
    DigestMismatch { packet: u32, local: u32 },
    #[error("inconsistent object sets: {0}")]
    InconsistentObjects(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn format<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}
