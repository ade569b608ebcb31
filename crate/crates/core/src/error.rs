//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arithmetic left the representable range. Silent wraparound is never
    /// allowed; every overflowing operation reports the value it choked on.
    #[error("arithmetic overflow computing {operation} at value {value}")]
    Overflow {
        operation: &'static str,
        value: u128,
    },

    #[error("value must be at least 1")]
    ZeroValue,

    /// The trajectory ran longer than the configured cap. Either the cap is
    /// too small or the start is a genuine counterexample; both deserve a
    /// loud report.
    #[error("step cap {cap} exceeded while classifying {start}")]
    StepCapExceeded { start: String, cap: u64 },

    #[error(
        "ranges are not contiguous: expected the next range to start at {expected}, found {found}"
    )]
    RangeGap { expected: u64, found: u64 },

    #[error("range starting at {lo} overlaps the previous range")]
    RangeOverlap { lo: u64 },

    #[error("merge requires at least one table")]
    EmptyMerge,

    #[error("checkpoint schema version {found:?} is not supported (expected {expected:?})")]
    CheckpointVersion {
        found: String,
        expected: &'static str,
    },

    #[error("checkpoint file is corrupted: {reason}")]
    CheckpointCorrupt { reason: String },

    #[error("checkpoint does not match this run: {reason}")]
    CheckpointMismatch { reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("found {found} power-of-two member(s); a gap report needs at least 3")]
    TooFewPowers { found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
