//! Recorded register arrays from which sketch pairs are assembled.
//!
//! Since each element lands in a uniformly random register, a random
//! permutation of a recorded register array is again a valid sketch of a
//! set with the same cardinality.

use std::collections::BTreeMap;

use hll_core::{HllSketch, SketchConfig};
use rand::seq::SliceRandom;

use crate::simulate::random_sketch;
use crate::{run_rng, Result, SimError};

#[derive(Debug, Clone)]
pub struct SketchPool {
    config: SketchConfig,
    entries: BTreeMap<u64, Vec<HllSketch>>,
}

impl SketchPool {
    pub fn new(config: SketchConfig) -> Self {
        Self { config, entries: BTreeMap::new() }
    }

    /// Records `per_cardinality` independent sketches for each cardinality.
    pub fn generate(config: SketchConfig, cardinalities: &[u64], per_cardinality: usize, seed: u64) -> Self {
        let mut pool = Self::new(config);
        for &n in cardinalities {
            if pool.entries.contains_key(&n) {
                continue;
            }
            let stream_seed = seed ^ n.wrapping_mul(0xD6E8_FEB8_6659_FD93);
            let sketches = (0..per_cardinality as u64).map(|i| random_sketch(stream_seed, i, config, n)).collect();
            pool.entries.insert(n, sketches);
        }
        pool
    }

    pub fn insert(&mut self, n: u64, sketch: HllSketch) -> Result<()> {
        if sketch.config() != self.config {
            return Err(hll_core::Error::ConfigMismatch { left: self.config, right: sketch.config() }.into());
        }
        self.entries.entry(n).or_default().push(sketch);
        Ok(())
    }

    #[inline]
    pub fn config(&self) -> SketchConfig {
        self.config
    }

    pub fn len(&self, n: u64) -> usize {
        self.entries.get(&n).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `index` for cardinality `n` with its registers shuffled by `seed`.
    /// Cardinality 0 always yields the empty sketch.
    pub fn make_sketch_with_cardinality(&self, n: u64, index: usize, seed: u64) -> Result<HllSketch> {
        if n == 0 {
            return Ok(HllSketch::new(self.config));
        }
        let entry = self
            .entries
            .get(&n)
            .and_then(|v| v.get(index))
            .ok_or(SimError::MissingPoolEntry { n, index })?;
        let mut registers = entry.registers().to_vec();
        registers.shuffle(&mut run_rng(seed, index as u64));
        Ok(HllSketch::from_registers(self.config, registers)?)
    }
}
