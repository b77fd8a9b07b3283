//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation, sampling, and ingestion modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("concentration parameters must be positive and finite, got ({0}, {1}, {2})")]
    InvalidConcentration(f64, f64, f64),

    #[error("gamma shape must be positive and finite, got {0}")]
    InvalidShape(f64),

    #[error("proportions must be positive and sum to one, got ({0}, {1}, {2})")]
    InvalidProportions(f64, f64, f64),

    #[error("coverage parameter rho must lie in (0, 1), got {0}")]
    InvalidRho(f64),

    #[error("interval multiplier gamma must be nonnegative and finite, got {0}")]
    InvalidGamma(f64),

    #[error(
        "sample of {actual} draws is too small for the requested level (need at least {needed})"
    )]
    SampleTooSmall { needed: usize, actual: usize },

    #[error("sample draws must be finite and lie in [-1, 1]")]
    InvalidSample,

    #[error("sample must contain at least one draw")]
    EmptySample,

    #[error("sample size n must be at least 1")]
    ZeroSampleSize,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no sample size up to {cap} satisfies the average length criterion")]
    NonConvergence { cap: u64 },

    #[error("score {0} is out of the 0..=10 survey range")]
    ScoreOutOfRange(i64),

    #[error("row {row}: cannot parse `{value}` as an integer score")]
    MalformedScore { value: String, row: u64 },

    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("row {row}: {source}")]
    AtRow { row: u64, source: Box<Error> },

    #[error("state file invariant violated: {0}")]
    StateInvariant(String),

    #[error("unsupported state file version {found} (expected {expected})")]
    StateVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed state file: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
