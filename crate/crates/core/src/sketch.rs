use std::fmt;

use crate::hashing::{ElementHasher, Xxh3Hasher};
use crate::{Error, MultiplicityVector, Result};

pub const MIN_PRECISION: u8 = 1;
pub const MAX_PRECISION: u8 = 26;

/// Leading bytes of the serialized form.
pub const SKETCH_MAGIC: [u8; 4] = *b"HLLR";

const HEADER_LEN: usize = SKETCH_MAGIC.len() + 2;

/// Sketch parameters: `p` index bits select one of `m = 2^p` registers and
/// the next `q` hash bits determine the register update value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SketchConfig {
    p: u8,
    q: u8,
}

impl SketchConfig {
    pub fn new(p: u8, q: u8) -> Result<Self> {
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "p = {p} outside of [{MIN_PRECISION}, {MAX_PRECISION}]"
            )));
        }
        if u32::from(p) + u32::from(q) > 64 {
            return Err(Error::InvalidConfig(format!("p + q = {} exceeds 64 hash bits", u32::from(p) + u32::from(q))));
        }
        Ok(Self { p, q })
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> u8 {
        self.q
    }

    #[inline]
    pub fn num_registers(&self) -> usize {
        1 << self.p
    }

    /// Value of a saturated register.
    #[inline]
    pub fn max_value(&self) -> u8 {
        self.q + 1
    }

    /// Register index and update value for a hash.
    ///
    /// The index is taken from the most significant `p` bits. The value is
    /// the 1-based position of the first set bit within the following `q`
    /// bits, or `q + 1` if they are all zero. Remaining low bits are unused.
    #[inline]
    pub fn locate(&self, hash: u64) -> (usize, u8) {
        let index = (hash >> (64 - self.p)) as usize;
        let rest = hash << self.p;
        let k = (rest.leading_zeros() + 1).min(u32::from(self.q) + 1);
        (index, k as u8)
    }
}

impl fmt::Display for SketchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={})", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HllSketch {
    config: SketchConfig,
    registers: Vec<u8>,
}

impl HllSketch {
    pub fn new(config: SketchConfig) -> Self {
        Self { config, registers: vec![0; config.num_registers()] }
    }

    pub fn from_registers(config: SketchConfig, registers: Vec<u8>) -> Result<Self> {
        if registers.len() != config.num_registers() {
            return Err(Error::InvalidConfig(format!(
                "{} registers given, {config} needs {}",
                registers.len(),
                config.num_registers()
            )));
        }
        if let Some(&v) = registers.iter().find(|&&v| v > config.max_value()) {
            return Err(Error::InvalidConfig(format!("register value {v} exceeds {}", config.max_value())));
        }
        Ok(Self { config, registers })
    }

    #[inline]
    pub fn config(&self) -> SketchConfig {
        self.config
    }

    #[inline]
    pub fn registers(&self) -> &[u8] {
        &self.registers
    }

    pub fn into_registers(self) -> Vec<u8> {
        self.registers
    }

    #[inline]
    pub fn insert_hash(&mut self, hash: u64) {
        let (i, k) = self.config.locate(hash);
        let r = &mut self.registers[i];
        if k > *r {
            *r = k;
        }
    }

    /// Hashes `element` with the default hasher and inserts it.
    pub fn insert(&mut self, element: impl AsRef<[u8]>) {
        self.insert_with(&Xxh3Hasher::default(), element);
    }

    pub fn insert_with<H: ElementHasher + ?Sized>(&mut self, hasher: &H, element: impl AsRef<[u8]>) {
        self.insert_hash(hasher.hash_bytes(element.as_ref()));
    }

    /// Register-wise maximum of two sketches with equal configuration.
    pub fn merge(&self, other: &HllSketch) -> Result<HllSketch> {
        let mut out = self.clone();
        out.merge_in_place(other)?;
        Ok(out)
    }

    pub fn merge_in_place(&mut self, other: &HllSketch) -> Result<()> {
        self.check_compatible(other)?;
        for (a, &b) in self.registers.iter_mut().zip(&other.registers) {
            *a = (*a).max(b);
        }
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &HllSketch) -> Result<()> {
        if self.config != other.config {
            return Err(Error::ConfigMismatch { left: self.config, right: other.config });
        }
        Ok(())
    }

    /// Converts to a `(p', q')` sketch. The result is identical to the sketch
    /// obtained by inserting the same hashes at `(p', q')` directly.
    pub fn compress(&self, p: u8, q: u8) -> Result<HllSketch> {
        let target = SketchConfig::new(p, q)?;
        let (p0, q0) = (u32::from(self.config.p), u32::from(self.config.q));
        if u32::from(p) > p0 || u32::from(p) + u32::from(q) > p0 + q0 {
            return Err(Error::InvalidConfig(format!("cannot compress {} into {target}", self.config)));
        }
        let d = p0 - u32::from(p);
        let limit = u32::from(q) + 1;
        let block = 1usize << d;
        let registers = self
            .registers
            .chunks_exact(block)
            .map(|regs| match regs.iter().position(|&r| r != 0) {
                None => 0,
                Some(0) => (u32::from(regs[0]) + d).min(limit) as u8,
                // j > 0 carries at least one set bit among the d dropped index bits
                Some(j) => ((j as u32).leading_zeros() - (32 - d) + 1).min(limit) as u8,
            })
            .collect();
        Ok(HllSketch { config: target, registers })
    }

    pub fn counts(&self) -> MultiplicityVector {
        let mut counts = vec![0u32; self.config.q as usize + 2];
        for &r in &self.registers {
            counts[r as usize] += 1;
        }
        MultiplicityVector::from_parts(counts, self.registers.len() as u32)
    }

    /// Serialized layout: magic, `p`, `q`, then one byte per register.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.registers.len());
        out.extend_from_slice(&SKETCH_MAGIC);
        out.push(self.config.p);
        out.push(self.config.q);
        out.extend_from_slice(&self.registers);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || bytes[..4] != SKETCH_MAGIC {
            return Err(Error::Format("missing sketch header".into()));
        }
        let config = SketchConfig::new(bytes[4], bytes[5])?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != config.num_registers() {
            return Err(Error::Format(format!(
                "expected {} register bytes for {config}, found {}",
                config.num_registers(),
                body.len()
            )));
        }
        Self::from_registers(config, body.to_vec()).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Sketch that maintains its multiplicity vector and minimum register value
/// during insertion, so estimates need no pass over the registers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedSketch {
    sketch: HllSketch,
    counts: MultiplicityVector,
    min_value: u8,
}

impl TrackedSketch {
    pub fn new(config: SketchConfig) -> Self {
        Self {
            sketch: HllSketch::new(config),
            counts: MultiplicityVector::empty(config.num_registers() as u32, config.q),
            min_value: 0,
        }
    }

    pub fn from_sketch(sketch: HllSketch) -> Self {
        let counts = sketch.counts();
        let min_value = sketch.registers.iter().copied().min().unwrap_or(0);
        Self { sketch, counts, min_value }
    }

    /// Inserts a hash and reports whether a register changed.
    #[inline]
    pub fn insert_hash(&mut self, hash: u64) -> bool {
        let (i, k) = self.sketch.config.locate(hash);
        if k <= self.min_value {
            return false;
        }
        let old = self.sketch.registers[i];
        if k <= old {
            return false;
        }
        self.sketch.registers[i] = k;
        let counts = self.counts.counts_mut();
        counts[old as usize] -= 1;
        counts[k as usize] += 1;
        if old == self.min_value {
            while counts[self.min_value as usize] == 0 {
                self.min_value += 1;
            }
        }
        true
    }

    #[inline]
    pub fn sketch(&self) -> &HllSketch {
        &self.sketch
    }

    pub fn into_sketch(self) -> HllSketch {
        self.sketch
    }

    #[inline]
    pub fn counts(&self) -> &MultiplicityVector {
        &self.counts
    }

    #[inline]
    pub fn min_value(&self) -> u8 {
        self.min_value
    }
}
