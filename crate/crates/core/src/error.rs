use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error)]
pub enum HywError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HywError>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HywError::Input(msg.into()))
}
