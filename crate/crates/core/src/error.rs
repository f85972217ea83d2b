//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A score fed to an estimator or oracle was NaN or infinite.
    #[error("non-finite score: {0}")]
    NonFiniteScore(f64),

    /// A moment accessor was called on an arm with zero observations.
    #[error("arm state has no samples yet")]
    NoSamples,

    /// Unbiased variance needs at least two observations.
    #[error("unbiased variance needs at least 2 samples, arm has {0}")]
    TooFewSamples(u64),

    /// Every entry of a variance profile was zero (allocation shares undefined).
    #[error("degenerate variance profile: all {0} variances are zero")]
    DegenerateProfile(usize),

    /// A profile or config field was out of its legal range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The adaptive phase was entered before every arm had one pull.
    #[error("warm-up incomplete: arm {arm} has zero pulls")]
    WarmupIncomplete { arm: usize },

    /// Budget cannot cover the warm-up phase. Reports the minimum feasible
    /// budget for the requested mode alongside both standard modes.
    #[error(
        "budget {budget} is below the warm-up minimum {required} \
         ({arms} arms x {warmup} warm-up pulls); minimum feasible budget is \
         {required} in the requested mode ({experimental_min} experimental, \
         {theory_min} theory)"
    )]
    BudgetTooSmall {
        budget: u64,
        required: u64,
        arms: usize,
        warmup: u64,
        experimental_min: u64,
        theory_min: u64,
    },

    /// Paired slices had different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Correlation is undefined for constant (or all-tied) input.
    #[error("correlation undefined: {0} input is constant")]
    ConstantInput(&'static str),

    /// Fewer data points than the operation can work with.
    #[error("need at least {required} data points, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    /// The oracle cannot answer the request (e.g. ground truth of a remote judge).
    #[error("unsupported oracle operation: {0}")]
    Unsupported(&'static str),

    /// Dataset parsing/validation failure; message carries line/pair context.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// Remote judge returned a malformed or out-of-range reply.
    #[error("judge protocol error: {0}")]
    Protocol(String),

    /// Remote judge unreachable after the configured retries.
    #[error("judge query failed after {attempts} attempts: {message}")]
    QueryFailed { attempts: u32, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Persisted results are missing or inconsistent.
    #[error("results error: {0}")]
    Results(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
