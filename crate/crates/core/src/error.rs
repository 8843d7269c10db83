use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: symbol out of range ({symbol} >= {b})")]
    SymbolOutOfRange { line: usize, symbol: u64, b: u32 },

    /// Cylinder data does not reach the requested depth.
    #[error("insufficient depth: need {needed}, have {available}")]
    InsufficientDepth { needed: u64, available: u64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("sampling budget exhausted after {draws} draws ({found} of {needed} blocks)")]
    SamplingExhausted { draws: u64, found: usize, needed: String },

    #[error("too large: {0}")]
    TooLarge(String),

    /// Finite-scale certificate only; says nothing about larger windows.
    #[error("no trace: {0}")]
    NoTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
