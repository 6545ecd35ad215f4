use thiserror::Error;

/// Unified error type for the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trace load error at row {row}: {msg}")]
    TraceLoad { row: usize, msg: String },

    #[error("insufficient peaks: found {found}, need {need}")]
    InsufficientPeaks { found: usize, need: usize },

    #[error("underdetermined fit for phase {phase} ({sign}): need >= 2 pairs with distinct theta")]
    UnderdeterminedFit { phase: usize, sign: String },

    #[error("non-invertible model: slope is zero")]
    NonInvertibleModel,

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("segmentation error: {0}")]
    Segmentation(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("degenerate test: zero-variance differences with nonzero mean")]
    DegenerateTest,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("key space too large to materialize: {size} candidates exceeds guard of {guard}")]
    SizeGuard { size: u64, guard: u64 },

    #[error("profile schema version mismatch: found {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
