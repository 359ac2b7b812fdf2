use thiserror::Error;

/// Errors surfaced by the library's fallible operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Target rank must be at least 1.
    #[error("rank m must be >= 1, got {0}")]
    InvalidRank(usize),

    /// The array engine assumes pairwise-distinct inputs.
    #[error("duplicate element {value} encountered; inputs must be pairwise distinct")]
    DuplicateElements { value: f64 },

    /// Specialized mean formulas exist only for m in 1..=4.
    #[error("no specialized mean formula for rank m = {0}; supported ranks are 1..=4")]
    UnsupportedRank(usize),

    /// Exact PMF computation refused: the dense rational DP would not fit.
    #[error("exact pmf for n = {n}, m = {m} exceeds resource limits: {detail}")]
    Resource { n: usize, m: usize, detail: String },

    /// A parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Equal-size sample sets are required for the order-statistics coupling.
    #[error("sample size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    /// Monte Carlo estimators need at least two samples for a CI.
    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
