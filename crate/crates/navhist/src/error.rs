use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },

    #[error("non-contiguous timestep at line {line}: expected {expected}, got {got}")]
    NonContiguousTimestep {
        line: usize,
        expected: u64,
        got: u64,
    },

    #[error("non-constant height at line {line}: z={got}, trajectory height is {expected}")]
    NonConstantHeight { line: usize, expected: f64, got: f64 },

    #[error("feature dimension mismatch at line {line}: expected {expected}, got {got}")]
    FeatureDimMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("header object must be line 1, found at line {line}")]
    HeaderNotFirst { line: usize },

    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid sampled history: {0}")]
    InvalidHistory(String),

    #[error("invalid episode: {0}")]
    InvalidEpisode(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty token matrix")]
    EmptyTokenMatrix,

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-positive episode length")]
    NonPositiveLength,

    #[error("rooms visited ({visited}) exceeds total rooms ({total})")]
    RoomsExceedTotal { visited: usize, total: usize },

    #[error("positive log-probability {0} in answer tokens")]
    PositiveLogProb(f64),

    #[error("house generation infeasible: {0}")]
    Infeasible(String),

    #[error("goal unreachable from start")]
    UnreachableGoal,

    #[error("invalid policy run: {0}")]
    InvalidPolicyRun(String),

    #[error("missing section: {0}")]
    MissingSection(&'static str),

    #[error("duplicate section: {0}")]
    DuplicateSection(&'static str),

    #[error("expected exactly 2 exemplars, got {0}")]
    MissingExemplars(usize),

    #[error("instruction must be non-empty")]
    EmptyInstruction,

    #[error("invalid frame refs: {0}")]
    InvalidFrameRefs(String),

    #[error("generation failed after {attempts} attempt(s): {msg}")]
    Generation { attempts: u32, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
