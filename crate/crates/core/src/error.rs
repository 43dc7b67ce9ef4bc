use std::path::PathBuf;

use thiserror::Error;

use crate::matrix::UserId;

#[derive(Debug, Error)]
pub enum CfError {
    // The io::Error is chained via source(), not repeated in the message, so
    // error-report formatters that walk the chain print it exactly once.
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown user id {0}")]
    UnknownUser(UserId),

    #[error("split produced an empty {side} side; adjust train fraction or seed")]
    EmptySplit { side: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Parallel and sequential runs disagreed on the output checksum. This is
    /// a correctness failure, never a usage error, and callers are expected to
    /// treat it as fatal.
    #[error(
        "output digest mismatch for {measure} at workers={workers}: \
         got {got:#018x}, expected {expected:#018x}"
    )]
    DigestMismatch {
        measure: String,
        workers: usize,
        got: u64,
        expected: u64,
    },
}

pub type Result<T> = std::result::Result<T, CfError>;
