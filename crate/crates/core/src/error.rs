use std::io;

use thiserror::Error;

/// Errors produced anywhere in the simulation, training and detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular geometry: {0}")]
    Singular(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("gradient tape does not match the network (stale or foreign tape)")]
    StaleTape,

    #[error("degenerate observation: {0}")]
    Degenerate(&'static str),

    #[error("training data contains {0} H1-labelled observations")]
    JammedTrainingData(usize),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("empty score class: {0}")]
    EmptyClass(&'static str),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::ProbabilityOutOfRange(_) => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        }
    }
}
