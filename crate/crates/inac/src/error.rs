//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by configuration validation, signal construction and the
/// analytic formulas.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The three-way rate identity cannot hold with an integer rate ratio.
    #[error("rate ratio M = {m} is not an integer (relative deviation {dev:.3e})")]
    NonIntegerRateRatio { m: f64, dev: f64 },

    /// Chips per symbol came out fractional.
    #[error("spreading gain {name} = {value} is not an integer number of chips")]
    NonIntegerGain { name: &'static str, value: f64 },

    /// A config field failed a basic validity check.
    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    /// Polynomial does not generate a full-period sequence.
    #[error("polynomial with taps {taps:?} is not primitive (period {period} != {expected})")]
    NonPrimitivePolynomial {
        taps: Vec<u32>,
        period: usize,
        expected: usize,
    },

    /// Requested sequence length exceeds the generator period.
    #[error("requested length {requested} exceeds sequence period {period}")]
    LengthExceedsPeriod { requested: usize, period: usize },

    /// Correlation window fell outside the sample buffer.
    #[error("correlation span [{start}, {start}+{span}) out of range for {len} samples")]
    OutOfRange { start: usize, span: usize, len: usize },

    /// Input vectors had inconsistent lengths.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Explicit payload did not match the frame layout.
    #[error("payload length mismatch: expected {expected} symbols, got {got}")]
    PayloadLengthMismatch { expected: usize, got: usize },

    /// Operation called for the wrong power-allocation scenario.
    #[error("wrong scenario: {0}")]
    WrongScenario(String),

    /// Impact factor outside (0, 1].
    #[error("delta = {0} outside (0, 1]")]
    InvalidDelta(f64),

    /// Shift-keying alphabet does not fit the sequence.
    #[error("shift alphabet 2^{k} does not fit a {kp}-chip sequence")]
    ShiftAlphabetTooLarge { k: u32, kp: usize },

    /// Least-squares fit ended on the search boundary.
    #[error("fit hit the boundary of the admissible range: {0}")]
    FitOutOfRange(String),

    /// Experiment name not in the registry.
    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
