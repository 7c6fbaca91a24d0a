use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input slice or stream had the wrong length.
    #[error("input size error: expected {expected}, got {got}")]
    InputSize { expected: usize, got: usize },

    /// A parameter or configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sequence generator was seeded with the all-zero state.
    #[error("zero seed locks the shift register at zero")]
    ZeroSeed,

    /// Timing recovery was asked to run on a stream with no signal in it.
    #[error("no signal present in input stream")]
    NoSignal,

    /// The receiver never achieved frame synchronization.
    #[error("no frame synchronization achieved")]
    NoSync,

    /// A received codeword had more byte errors than the code can correct.
    /// This is a per-frame signal, not a fatal condition: the frame is
    /// dropped and counted upstream.
    #[error("uncorrectable codeword (more than 8 byte errors)")]
    Uncorrectable,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
