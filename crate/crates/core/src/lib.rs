//! HyperLogLog sketches with bias-free cardinality estimation.
//!
//! The crate provides the `(p, q)`-parameterized HyperLogLog register array
//! together with three single-sketch estimators and a joint estimator for
//! set operations on two sketches:
//!
//! - [`estimation::original_estimate`]: the classic raw estimator with small
//!   and large range corrections, kept as a baseline.
//! - [`estimation::improved_raw_estimate`]: a raw estimator with correction
//!   terms for zero-valued and saturated registers that stays unbiased over
//!   the whole cardinality range.
//! - [`estimation::ml_estimate`]: the maximum-likelihood estimate under the
//!   Poisson model, solved with a secant iteration.
//! - [`joint::estimate_joint`]: joint maximum-likelihood estimates of
//!   `|A \ B|`, `|B \ A|` and `|A ∩ B|` from two sketches.
//!
//! Estimators work on the [`MultiplicityVector`] of a sketch, which is a
//! sufficient statistic for the cardinality.
//!
//! ```
//! use hll_core::{HllSketch, SketchConfig};
//! use hll_core::estimation::{improved_raw_estimate, ml_estimate, MlOptions};
//!
//! let mut sketch = HllSketch::new(SketchConfig::new(12, 20).unwrap());
//! for i in 0..10_000u32 {
//!     sketch.insert(i.to_le_bytes());
//! }
//! let counts = sketch.counts();
//! let raw = improved_raw_estimate(&counts);
//! let ml = ml_estimate(&counts, &MlOptions::default());
//! assert!((raw / 10_000.0 - 1.0).abs() < 0.1);
//! assert!((ml / 10_000.0 - 1.0).abs() < 0.1);
//! ```

mod counts;
mod error;
pub mod estimation;
pub mod hashing;
pub mod joint;
pub mod quasi_newton;
mod sketch;
pub mod special;

pub use counts::MultiplicityVector;
pub use error::{Error, Result};
pub use sketch::{HllSketch, SketchConfig, TrackedSketch, MAX_PRECISION, MIN_PRECISION, SKETCH_MAGIC};
