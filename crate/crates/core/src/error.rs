use thiserror::Error;

use crate::SketchConfig;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sketch configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible sketches: {left} vs {right}")]
    ConfigMismatch { left: SketchConfig, right: SketchConfig },

    #[error("invalid multiplicity vector: {0}")]
    InvalidCounts(String),

    #[error("{function}: argument {value} is outside of the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("numerical integration did not converge: {0}")]
    Quadrature(String),

    /// The raw estimate is at least `2^(p+q)`, so the large range correction
    /// `-2^(p+q) ln(1 - raw / 2^(p+q))` is undefined.
    #[error("raw estimate {raw} exceeds the domain of the large range correction (limit {limit})")]
    CorrectionDomainExceeded { raw: f64, limit: f64 },

    #[error("all registers are saturated, the estimate is unbounded")]
    Unbounded,

    #[error("non-finite value while evaluating {0}")]
    NumericOverflow(&'static str),

    #[error("optimizer did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("malformed sketch data: {0}")]
    Format(String),
}
