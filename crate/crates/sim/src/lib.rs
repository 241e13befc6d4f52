//! Monte Carlo harness for the estimators in `hll_core`.
//!
//! Sketches are fed with pseudo-random 64-bit values, which stand in for the
//! hashes of distinct elements. Estimates taken at the points of a
//! [`SnapshotSchedule`] are aggregated into relative error statistics and
//! written as CSV.

mod error;
pub mod joint_eval;
pub mod output;
pub mod pool;
mod schedule;
pub mod simulate;
pub mod single;
pub mod stats;

pub use error::{Result, SimError};
pub use schedule::{SnapshotSchedule, DEFAULT_RATIO};

/// Name of the generator written to CSV metadata.
pub const GENERATOR: &str = "pcg64mcg";

/// Generator for one independent run.
pub fn run_rng(seed: u64, run: u64) -> rand_pcg::Pcg64Mcg {
    use rand::SeedableRng;
    let mixed = seed ^ run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    rand_pcg::Pcg64Mcg::seed_from_u64(mixed)
}
