//! Streams of random hash values through tracked sketches.

use hll_core::{HllSketch, MultiplicityVector, SketchConfig, TrackedSketch};
use rand::Rng;

use crate::{run_rng, Result, SimError, SnapshotSchedule};

/// Parameters of the high-resolution sketch used by [`RecordMode::ViaCompress`].
pub const HIGH_RESOLUTION: (u8, u8) = (22, 42);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordMode {
    /// Record at the target configuration.
    #[default]
    Direct,
    /// Record at `(22, 42)` and compress to the target at every snapshot.
    ViaCompress,
}

/// Feeds run `run` of `seed` through a sketch and calls `record` at every
/// schedule point with the cardinality and the sketch state.
pub fn simulate_run(
    seed: u64,
    run: u64,
    config: SketchConfig,
    schedule: &SnapshotSchedule,
    mode: RecordMode,
    mut record: impl FnMut(u64, &MultiplicityVector),
) -> Result<()> {
    let mut rng = run_rng(seed, run);
    let record_config = match mode {
        RecordMode::Direct => config,
        RecordMode::ViaCompress => {
            let (p, q) = HIGH_RESOLUTION;
            if config.p() > p || config.p() + config.q() > p + q {
                return Err(SimError::InvalidArgument(format!("{config} cannot be derived from (22, 42)")));
            }
            SketchConfig::new(p, q)?
        }
    };
    let mut sketch = TrackedSketch::new(record_config);
    let mut n = 0u64;
    for &point in schedule.points() {
        while n < point {
            sketch.insert_hash(rng.next_u64());
            n += 1;
        }
        match mode {
            RecordMode::Direct => record(n, sketch.counts()),
            RecordMode::ViaCompress => {
                let compressed = sketch.sketch().compress(config.p(), config.q())?;
                record(n, &compressed.counts());
            }
        }
    }
    Ok(())
}

/// Snapshots of one run as `(n, counts)` pairs.
pub fn simulate_stream(
    seed: u64,
    run: u64,
    config: SketchConfig,
    schedule: &SnapshotSchedule,
    mode: RecordMode,
) -> Result<Vec<(u64, MultiplicityVector)>> {
    let mut out = Vec::with_capacity(schedule.points().len());
    simulate_run(seed, run, config, schedule, mode, |n, c| out.push((n, c.clone())))?;
    Ok(out)
}

/// Sketch of `n` random values from run `run` of `seed`.
pub fn random_sketch(seed: u64, run: u64, config: SketchConfig, n: u64) -> HllSketch {
    let mut rng = run_rng(seed, run);
    let mut s = HllSketch::new(config);
    for _ in 0..n {
        s.insert_hash(rng.next_u64());
    }
    s
}
