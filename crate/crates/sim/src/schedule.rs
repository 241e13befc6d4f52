use crate::{Result, SimError};

/// Cardinalities at which snapshots are taken: `1 ..= 10`, then the rounded
/// geometric series `10 r^i`, then `max_cardinality` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSchedule {
    points: Vec<u64>,
}

/// Default grid factor, 20 points per decade.
pub const DEFAULT_RATIO: f64 = 1.122_018_454_301_963_3;

impl SnapshotSchedule {
    pub fn geometric(max_cardinality: u64, ratio: f64) -> Result<Self> {
        if !ratio.is_finite() || ratio <= 1.0 {
            return Err(SimError::InvalidArgument(format!("grid ratio must exceed 1, got {ratio}")));
        }
        let mut points: Vec<u64> = (1..=10.min(max_cardinality)).collect();
        let mut i = 1;
        loop {
            let v = (10.0 * ratio.powi(i)).round() as u64;
            if v >= max_cardinality {
                break;
            }
            if points.last().is_none_or(|&last| v > last) {
                points.push(v);
            }
            i += 1;
        }
        if max_cardinality > 0 && points.last() != Some(&max_cardinality) {
            points.push(max_cardinality);
        }
        Ok(Self { points })
    }

    /// Explicit points, sorted and deduplicated. May contain 0.
    pub fn from_points(mut points: Vec<u64>) -> Self {
        points.sort_unstable();
        points.dedup();
        Self { points }
    }

    #[inline]
    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn max_cardinality(&self) -> u64 {
        self.points.last().copied().unwrap_or(0)
    }
}
