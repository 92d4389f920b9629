use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments, bounds or flag combinations.
    #[error("usage: {0}")]
    Usage(String),

    #[error("edge bound {0} exceeds the arithmetic budget (max {max})", max = crate::arith::MAX_EDGE)]
    Budget(u32),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// An operation was called outside its precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("checkpoint {path} does not match this run: {reason}")]
    CheckpointMismatch { path: PathBuf, reason: String },

    #[error("checkpoint {path} is corrupt: {reason}")]
    CheckpointCorrupt { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
