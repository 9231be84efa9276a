//! Error taxonomy shared by the library and the command-line harness.
//!
//! The three failure classes map onto the harness exit codes: validation
//! errors (bad parameters or configuration) exit 1, numerical failures
//! (bracket or convergence breakdown, blow-up) exit 2, and baseline
//! mismatches in verify mode exit 3.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DpError>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum DpError {
    /// Rejected input: parameters, grids, or configuration outside the
    /// admissible region (e.g. `c > 2k > 0` violated).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical procedure failed to converge or left its admissible
    /// range (bisection bracket lost, step-size underflow, blow-up).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A recomputed quantity disagrees with the regression baseline.
    #[error("baseline mismatch: {0}")]
    Baseline(String),

    /// File-system problems while reading configs or writing reports.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl DpError {
    /// Process exit code for the harness: 1 validation, 2 numerical,
    /// 3 baseline mismatch. I/O problems count as validation of the
    /// environment.
    pub fn exit_code(&self) -> i32 {
        match self {
            DpError::Validation(_) | DpError::Io(_) => 1,
            DpError::Numerical(_) => 2,
            DpError::Baseline(_) => 3,
        }
    }
}
