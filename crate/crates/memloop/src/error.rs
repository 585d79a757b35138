//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A waveform, source, or device specification violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A device state has left its valid domain (e.g. non-positive memristance).
    #[error("corrupt state: {0}")]
    CorruptState(String),

    /// An operation needs more samples or more unmasked points than it got.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The trace does not contain one full bipolar cycle.
    #[error("not segmentable: {0}")]
    NotSegmentable(String),

    /// A tangent fit is unusable for the requested derivation (e.g. zero gradient).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Pearson correlation is undefined for the given inputs.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// A text input failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
