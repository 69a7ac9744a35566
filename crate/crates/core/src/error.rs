//! Error type shared across the crate.

/// Errors produced by generators, objectives, solvers, and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter combination that can never be valid (s > n, zero
    /// dimensions, non-positive tolerances, malformed grid files, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Operands whose dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An input outside the mathematical domain of an operation (NaN
    /// arguments, out-of-range indices).
    #[error("domain error: {0}")]
    Domain(String),

    /// An instance on which the requested estimator is undefined.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A metric that is undefined for the given inputs (zero estimate,
    /// empty true support).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Missing data required by a diagnostic (e.g. a solver run without
    /// its iteration trace).
    #[error("missing data: {0}")]
    MissingData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file that does not follow the documented layout.
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
