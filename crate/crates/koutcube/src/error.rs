use std::io;
use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} out of range (expected 1..=30)")]
    InvalidDimension(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid subcube spec: {0}")]
    InvalidSpec(String),
    #[error("no unchosen direction left: the vertex already holds all n directions")]
    NoRoom,
    #[error("refused: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed sample file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
