use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] hll_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("no pool entry {index} for cardinality {n}")]
    MissingPoolEntry { n: u64, index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
