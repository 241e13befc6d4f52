use crate::{Error, Result};

/// Register value histogram `C_0 ..= C_{q+1}` of a sketch.
///
/// `counts()[k]` is the number of registers holding value `k`. The sum is the
/// register count `m`, which is always a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityVector {
    counts: Vec<u32>,
    m: u32,
}

impl MultiplicityVector {
    /// Builds a vector from raw counts. The length must be `q + 2` and the
    /// counts must sum to a power of two no larger than `2^26`.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidCounts(format!(
                "need at least 2 entries, got {}",
                counts.len()
            )));
        }
        if counts.len() > 65 {
            return Err(Error::InvalidCounts(format!("{} entries exceed q <= 63", counts.len())));
        }
        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if !total.is_power_of_two() || !(2..=1 << crate::MAX_PRECISION).contains(&total) {
            return Err(Error::InvalidCounts(format!(
                "register total {total} is not a power of two in [2, 2^26]"
            )));
        }
        Ok(Self { counts, m: total as u32 })
    }

    /// All registers zero.
    pub(crate) fn empty(m: u32, q: u8) -> Self {
        let mut counts = vec![0; q as usize + 2];
        counts[0] = m;
        Self { counts, m }
    }

    pub(crate) fn from_parts(counts: Vec<u32>, m: u32) -> Self {
        debug_assert_eq!(counts.iter().map(|&c| u64::from(c)).sum::<u64>(), u64::from(m));
        Self { counts, m }
    }

    #[inline]
    pub(crate) fn counts_mut(&mut self) -> &mut [u32] {
        &mut self.counts
    }

    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, k: usize) -> u32 {
        self.counts[k]
    }

    /// Number of registers.
    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.m.trailing_zeros() as u8
    }

    /// Largest regular register value; `q + 1` marks a saturated register.
    #[inline]
    pub fn q(&self) -> u8 {
        (self.counts.len() - 2) as u8
    }

    #[inline]
    pub fn zeros(&self) -> u32 {
        self.counts[0]
    }

    #[inline]
    pub fn saturated(&self) -> u32 {
        self.counts[self.counts.len() - 1]
    }

    /// Smallest and largest `k` with `C_k > 0`.
    pub fn value_range(&self) -> (usize, usize) {
        let lo = self.counts.iter().position(|&c| c > 0).unwrap_or(0);
        let hi = self.counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        (lo, hi)
    }
}
