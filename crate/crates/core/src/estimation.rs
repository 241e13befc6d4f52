//! Single-sketch cardinality estimators.
//!
//! All estimators take the [`MultiplicityVector`] of a sketch. The maximum
//! likelihood estimator and the improved raw estimator are unbiased over the
//! full cardinality range; [`original_estimate`] is provided as a baseline.

use crate::special::{self, CorrectionTables, ALPHA_INF};
use crate::{Error, MultiplicityVector, Result};

/// Common interface over the estimators, used where the estimator is chosen
/// at runtime.
pub trait CardinalityEstimator {
    fn estimate(&self, counts: &MultiplicityVector) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OriginalEstimator;

impl CardinalityEstimator for OriginalEstimator {
    fn estimate(&self, counts: &MultiplicityVector) -> Result<f64> {
        original_estimate(counts)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ImprovedRawEstimator {
    tables: Option<CorrectionTables>,
}

impl ImprovedRawEstimator {
    pub fn new() -> Self {
        Self { tables: None }
    }

    /// Uses precomputed σ/τ tables for sketches with `m` registers.
    pub fn with_tables(m: u32) -> Self {
        Self { tables: Some(CorrectionTables::new(m)) }
    }
}

impl CardinalityEstimator for ImprovedRawEstimator {
    fn estimate(&self, counts: &MultiplicityVector) -> Result<f64> {
        match &self.tables {
            Some(t) => improved_raw_estimate_with_tables(counts, t),
            None => Ok(improved_raw_estimate(counts)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MlEstimator {
    pub options: MlOptions,
}

impl CardinalityEstimator for MlEstimator {
    fn estimate(&self, counts: &MultiplicityVector) -> Result<f64> {
        Ok(ml_estimate(counts, &self.options))
    }
}

/// Raw estimate `α∞ m² / Σ C_k 2^-k` with linear counting for small and the
/// `log(1 - n / 2^(p+q))` correction for large values.
///
/// The large range correction covers only estimates below `2^(p+q)`. Beyond
/// that, [`Error::CorrectionDomainExceeded`] is returned, which happens for
/// example when all registers are saturated.
pub fn original_estimate(c: &MultiplicityVector) -> Result<f64> {
    let m = f64::from(c.m());
    let denom = c
        .counts()
        .iter()
        .rev()
        .fold(0.0, |acc, &ck| 0.5 * acc + f64::from(ck));
    let raw = ALPHA_INF * m * m / denom;
    let limit = ((u32::from(c.p()) + u32::from(c.q())) as f64).exp2();
    if raw <= 2.5 * m {
        if c.zeros() > 0 {
            Ok(m * (m / f64::from(c.zeros())).ln())
        } else {
            Ok(raw)
        }
    } else if raw <= limit / 30.0 {
        Ok(raw)
    } else if raw >= limit {
        Err(Error::CorrectionDomainExceeded { raw, limit })
    } else {
        Ok(-limit * (-raw / limit).ln_1p())
    }
}

/// Raw estimator with σ/τ terms replacing the contributions of zero and
/// saturated registers. Returns 0 for an empty sketch.
pub fn improved_raw_estimate(c: &MultiplicityVector) -> f64 {
    let m = f64::from(c.m());
    let sigma = m * special::sigma(f64::from(c.zeros()) / m).unwrap();
    let tau = m * special::tau(1.0 - f64::from(c.saturated()) / m).unwrap();
    improved_raw_from_terms(c, sigma, tau)
}

pub fn improved_raw_estimate_with_tables(c: &MultiplicityVector, tables: &CorrectionTables) -> Result<f64> {
    if tables.m() != c.m() {
        return Err(Error::InvalidCounts(format!(
            "tables built for m = {}, vector has m = {}",
            tables.m(),
            c.m()
        )));
    }
    Ok(improved_raw_from_terms(c, tables.sigma(c.zeros()), tables.tau(c.saturated())))
}

fn improved_raw_from_terms(c: &MultiplicityVector, sigma: f64, tau: f64) -> f64 {
    let m = f64::from(c.m());
    let counts = c.counts();
    let q = c.q() as usize;
    let mut z = tau;
    for &ck in counts[1..=q].iter().rev() {
        z = 0.5 * (z + f64::from(ck));
    }
    z += sigma;
    ALPHA_INF * m * m / z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOptions {
    /// Relative stop tolerance is `epsilon / sqrt(m)`.
    pub epsilon: f64,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self { epsilon: 1e-2 }
    }
}

impl MlOptions {
    pub fn delta(&self, m: u32) -> f64 {
        self.epsilon / f64::from(m).sqrt()
    }
}

/// Bounds on the root `x̂ = λ̂ / m` of the likelihood equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlBounds {
    pub weak_lower: f64,
    pub strong_lower: f64,
    pub strong_upper: f64,
    pub weak_upper: f64,
}

struct Sums {
    /// `Σ_{k=0}^{q} C_k 2^-k`
    a: f64,
    /// `Σ_{k=1}^{q} C_k 2^-k + C_{q+1} 2^-q`
    b: f64,
    kmin: usize,
    kmax: usize,
}

fn sums(c: &MultiplicityVector) -> Sums {
    let counts = c.counts();
    let q = c.q() as usize;
    let (lo, hi) = c.value_range();
    let kmin = lo.max(1);
    let kmax = hi.min(q);
    let mut z = 0.0;
    for k in (kmin..=kmax).rev() {
        z = 0.5 * z + f64::from(counts[k]);
    }
    z *= (-(kmin as f64)).exp2();
    Sums {
        a: z + f64::from(counts[0]),
        b: z + f64::from(counts[q + 1]) * (-(q as f64)).exp2(),
        kmin,
        kmax,
    }
}

pub fn ml_bounds(c: &MultiplicityVector) -> Result<MlBounds> {
    if c.saturated() == c.m() {
        return Err(Error::Unbounded);
    }
    if c.zeros() == c.m() {
        return Ok(MlBounds { weak_lower: 0.0, strong_lower: 0.0, strong_upper: 0.0, weak_upper: 0.0 });
    }
    let s = sums(c);
    let mp = f64::from(c.m() - c.zeros());
    let scale = (s.kmax as f64).exp2();
    Ok(MlBounds {
        weak_lower: mp / (s.a + 0.5 * s.b),
        strong_lower: mp / s.b * (s.b / s.a).ln_1p(),
        strong_upper: scale * (mp / (scale * s.a)).ln_1p(),
        weak_upper: mp / s.a,
    })
}

/// Left-hand side `f(x)` of the likelihood equation `f(x) = 0`, where the
/// maximum likelihood estimate is `λ̂ = m x̂`. Evaluated with [`special::h`]
/// directly; the estimator itself uses a faster recursion.
pub fn ml_root_function(c: &MultiplicityVector, x: f64) -> f64 {
    let counts = c.counts();
    let q = c.q() as usize;
    let mut f = -f64::from(c.m() - c.zeros());
    let mut a = 0.0;
    for (k, &ck) in counts[..=q].iter().enumerate() {
        let scaled = (-(k as f64)).exp2();
        a += f64::from(ck) * scaled;
        if k >= 1 && ck > 0 {
            f += f64::from(ck) * special::h(x * scaled).unwrap();
        }
    }
    if counts[q + 1] > 0 {
        f += f64::from(counts[q + 1]) * special::h(x * (-(q as f64)).exp2()).unwrap();
    }
    f + x * a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEstimate {
    pub cardinality: f64,
    /// Number of secant steps taken.
    pub iterations: u32,
}

/// Maximum likelihood estimate, `+∞` if all registers are saturated.
pub fn ml_estimate(c: &MultiplicityVector, options: &MlOptions) -> f64 {
    ml_solve(c, options, 1.0, |_| {}).cardinality
}

pub fn ml_estimate_detailed(c: &MultiplicityVector, options: &MlOptions) -> MlEstimate {
    ml_solve(c, options, 1.0, |_| {})
}

/// Secant iterates `x_1, x_2, ...` in units of `λ / m`, ending with the
/// returned value.
pub fn ml_iterates(c: &MultiplicityVector, options: &MlOptions) -> Vec<f64> {
    let mut out = Vec::new();
    ml_solve(c, options, 1.0, |x| out.push(x));
    out
}

/// Like [`ml_estimate_detailed`] with every `h` contribution to the root
/// function scaled by `1 + h_rel_error`. Used to study error propagation.
pub fn ml_estimate_perturbed(c: &MultiplicityVector, options: &MlOptions, h_rel_error: f64) -> MlEstimate {
    ml_solve(c, options, 1.0 + h_rel_error, |_| {})
}

fn ml_solve(c: &MultiplicityVector, options: &MlOptions, h_scale: f64, mut observe: impl FnMut(f64)) -> MlEstimate {
    let m = c.m();
    if c.saturated() == m {
        return MlEstimate { cardinality: f64::INFINITY, iterations: 0 };
    }
    let counts = c.counts();
    let q = c.q() as usize;
    let s = sums(c);
    let (kmin, kmax) = (s.kmin as i32, s.kmax as i32);
    let mut c_top = counts[q + 1];
    if q >= 1 {
        c_top += counts[s.kmax];
    }
    let c_top = f64::from(c_top);
    let mp = f64::from(m - c.zeros());

    let mut x = if s.b <= 1.5 * s.a {
        mp / (0.5 * s.b + s.a)
    } else {
        mp / s.b * (s.b / s.a).ln_1p()
    };
    observe(x);
    let delta = options.delta(m);
    let mut dx = x;
    let mut f_prev = 0.0;
    let mut iterations = 0;
    while dx > x * delta {
        iterations += 1;
        let kappa = 2 + x.log2().floor() as i32;
        let mut xs = x * f64::from(-(kmax.max(kappa) + 1)).exp2();
        let mut hv = special::h_taylor(2.0 * xs);
        for _ in kmax..kappa {
            hv = special::h_recursion_step(xs, hv);
            xs += xs;
        }
        let mut f = c_top * hv * h_scale;
        for k in (kmin..kmax).rev() {
            hv = special::h_recursion_step(xs, hv);
            f += f64::from(counts[k as usize]) * hv * h_scale;
            xs += xs;
        }
        f += x * s.a;
        if f > f_prev && mp >= f {
            dx *= (mp - f) / (f - f_prev);
        } else {
            dx = 0.0;
        }
        x += dx;
        f_prev = f;
        observe(x);
    }
    MlEstimate { cardinality: f64::from(m) * x, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(counts: &[u32]) -> MultiplicityVector {
        MultiplicityVector::from_counts(counts.to_vec()).unwrap()
    }

    #[test]
    fn empty_sketch_estimates() {
        let c = mv(&[4096, 0, 0]);
        assert_eq!(original_estimate(&c).unwrap(), 0.0);
        assert_eq!(improved_raw_estimate(&c), 0.0);
        assert_eq!(ml_estimate_detailed(&c, &MlOptions::default()), MlEstimate { cardinality: 0.0, iterations: 0 });
        let b = ml_bounds(&c).unwrap();
        assert_eq!([b.weak_lower, b.strong_lower, b.strong_upper, b.weak_upper], [0.0; 4]);
    }

    #[test]
    fn saturated_sketch() {
        let mut counts = vec![0u32; 22];
        counts[21] = 4096;
        let c = mv(&counts);
        assert_eq!(ml_estimate(&c, &MlOptions::default()), f64::INFINITY);
        assert_eq!(ml_bounds(&c), Err(Error::Unbounded));
        assert!(matches!(original_estimate(&c), Err(Error::CorrectionDomainExceeded { .. })));
        assert_eq!(improved_raw_estimate(&c), f64::INFINITY);
    }

    #[test]
    fn tables_agree() {
        let c = mv(&[1000, 2000, 1000, 96]);
        assert_eq!(ImprovedRawEstimator::with_tables(4096).estimate(&c).unwrap(), improved_raw_estimate(&c));
        assert!(ImprovedRawEstimator::with_tables(1024).estimate(&c).is_err());
    }

    #[test]
    fn linear_counting_equivalence() {
        let c = mv(&[1024, 3072]);
        let expected = 4096.0 * 4f64.ln();
        let got = ml_estimate(&c, &MlOptions::default());
        assert!((got / expected - 1.0).abs() < MlOptions::default().delta(4096));
        assert!((expected - 5678.2617).abs() < 1e-4);
    }
}
