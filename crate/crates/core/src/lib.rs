//! Compressed Collatz dynamics and the six mod-9 recurrent forms.
//!
//! Every positive integer is classified by the residue class (mod 9) of the
//! first power of two its compressed trajectory visits. The six possible
//! classes are exactly the units mod 9 (the orbit of 2 under multiplication),
//! labelled `a` through `f`. On top of that classification the crate provides:
//!
//! - [`dynamics`] — raw and compressed Collatz steps, power-of-two detection,
//!   mod-4 class reductions, and mod-9 form assignment.
//! - [`classifier`] — terminating form, stopping exponent, step count, and
//!   peak for a single start or a range, with an optional memo table.
//! - [`fsm`] — the six-state machine on (form, index) pairs that realizes one
//!   compressed step, plus verification suites for the power-of-two cycle and
//!   the doubling-invariance of classifications.
//! - [`wide`] — an arbitrary-precision mirror of the classifier for inputs
//!   beyond 128 bits.
//! - [`sweep`] — a chunked, memoized, deterministic parallel enumeration
//!   engine over `[1, N]` with frequency tables, member capture, and
//!   checkpoint/resume.
//! - [`analysis`] — per-form set construction, integer factorization,
//!   power-of-two exponent scans, and gap progression reports.
//! - [`oracle`] — an independent raw-map classification route used as a
//!   differential check.
//!
//! The `collatz-lab` binary exposes all of the above as subcommands.

pub mod analysis;
pub mod classifier;
pub mod dynamics;
pub mod error;
pub mod fsm;
pub mod oracle;
pub mod output;
pub mod sweep;
pub mod wide;

pub use analysis::Factorization;
pub use classifier::{Classification, MemoTable, DEFAULT_STEP_CAP};
pub use dynamics::{Form, Mod4Class, Value};
pub use error::{Error, Result};
pub use fsm::FsmState;
pub use sweep::{CaptureConfig, Checkpoint, FrequencyTable, SweepConfig, SweepOutcome};
