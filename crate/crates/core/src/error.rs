use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid lattice size {0}: the torus needs d >= 2")]
    InvalidDistance(usize),
    #[error("physical error rate {0} outside [0, 1)")]
    InvalidEpsilon(f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("odd number of defects ({0}) in a sector")]
    OddDefects(usize),
    #[error("weight set: {0}")]
    Weights(String),
    #[error("weight file checksum mismatch")]
    Checksum,
    #[error("weight file format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("edge-class convention mismatch: file has {found}, this build uses {expected}")]
    ClassConvention { found: String, expected: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("training diverged at step {step} (loss {loss})")]
    Diverged { step: usize, loss: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) => 4,
            Error::Invariant(_) | Error::NonFinite(_) | Error::OddDefects(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
