//! Error type shared by every module in the crate.

use thiserror::Error;

/// Unified error for pipeline, oracle, ledger, and optimizer operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition
    /// (geometry mismatch, even kernel, off-grid parameter, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configuration file or config value is malformed; the message names
    /// the offending key.
    #[error("invalid config: {0}")]
    Config(String),

    /// Serialized data (ledger line, pixmap, manifest) failed to parse.
    #[error("malformed input: {0}")]
    Malformed(String),

    /// Ledger replay or invariant verification failed; the message names the
    /// first violated record or invariant.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Numerical degeneracy that retries could not fix (e.g. a singular
    /// surrogate kernel matrix after jitter retries).
    #[error("degenerate computation: {0}")]
    Degenerate(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
