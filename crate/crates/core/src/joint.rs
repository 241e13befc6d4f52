//! Joint estimation of `|A \ B|`, `|B \ A|` and `|A ∩ B|` from two sketches.
//!
//! The two sketches are compared register by register. The resulting
//! [`JointStatistic`] is sufficient for the Poisson rates `λ_a`, `λ_b` and
//! `λ_x` of the two relative complements and the intersection. The estimates
//! maximize the likelihood in the log-rates `φ = ln λ` with BFGS, starting
//! from the inclusion-exclusion estimates.

use crate::estimation::{ml_estimate, CardinalityEstimator, MlOptions};
use crate::quasi_newton::{self, Termination};
use crate::{Error, HllSketch, MultiplicityVector, Result, SketchConfig};

/// Per-value register comparison counts of two sketches.
///
/// For each value `k`, `c1_less[k]` counts registers where the first sketch
/// holds `k` and the second a larger value, `c1_greater[k]` those where the
/// first holds `k` and the second a smaller one, and `c_equal[k]` those where
/// both hold `k`. `c2_less` and `c2_greater` are defined symmetrically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointStatistic {
    config: SketchConfig,
    pub c1_less: Vec<u32>,
    pub c1_greater: Vec<u32>,
    pub c2_less: Vec<u32>,
    pub c2_greater: Vec<u32>,
    pub c_equal: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// Every register of the first sketch is larger than in the second.
    First,
    Second,
}

impl JointStatistic {
    pub fn from_sketches(s1: &HllSketch, s2: &HllSketch) -> Result<Self> {
        s1.check_compatible(s2)?;
        let config = s1.config();
        let len = config.q() as usize + 2;
        let mut stat = Self {
            config,
            c1_less: vec![0; len],
            c1_greater: vec![0; len],
            c2_less: vec![0; len],
            c2_greater: vec![0; len],
            c_equal: vec![0; len],
        };
        for (&k1, &k2) in s1.registers().iter().zip(s2.registers()) {
            let (k1, k2) = (k1 as usize, k2 as usize);
            match k1.cmp(&k2) {
                std::cmp::Ordering::Less => {
                    stat.c1_less[k1] += 1;
                    stat.c2_greater[k2] += 1;
                }
                std::cmp::Ordering::Greater => {
                    stat.c1_greater[k1] += 1;
                    stat.c2_less[k2] += 1;
                }
                std::cmp::Ordering::Equal => stat.c_equal[k1] += 1,
            }
        }
        Ok(stat)
    }

    #[inline]
    pub fn config(&self) -> SketchConfig {
        self.config
    }

    /// Statistic of the pair with the two sketches exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            config: self.config,
            c1_less: self.c2_less.clone(),
            c1_greater: self.c2_greater.clone(),
            c2_less: self.c1_less.clone(),
            c2_greater: self.c1_greater.clone(),
            c_equal: self.c_equal.clone(),
        }
    }

    fn combine(&self, parts: [&[u32]; 3]) -> MultiplicityVector {
        let counts = (0..self.c_equal.len()).map(|k| parts.iter().map(|p| p[k]).sum()).collect();
        MultiplicityVector::from_parts(counts, self.config.num_registers() as u32)
    }

    /// Multiplicity vector of the first sketch.
    pub fn first_counts(&self) -> MultiplicityVector {
        self.combine([&self.c1_less, &self.c_equal, &self.c1_greater])
    }

    pub fn second_counts(&self) -> MultiplicityVector {
        self.combine([&self.c2_less, &self.c_equal, &self.c2_greater])
    }

    /// Multiplicity vector of the merged sketch.
    pub fn union_counts(&self) -> MultiplicityVector {
        self.combine([&self.c1_greater, &self.c_equal, &self.c2_greater])
    }

    /// True if every register pair has a zero on at least one side, so the
    /// sketches cannot share an element.
    pub fn is_disjoint(&self) -> bool {
        self.c1_less[0] + self.c_equal[0] + self.c2_less[0] == self.config.num_registers() as u32
    }

    pub fn dominance(&self) -> Option<Dominance> {
        let zero = |v: &[u32]| v.iter().all(|&c| c == 0);
        if zero(&self.c_equal) && zero(&self.c1_less) && zero(&self.c2_greater) {
            Some(Dominance::First)
        } else if zero(&self.c_equal) && zero(&self.c2_less) && zero(&self.c1_greater) {
            Some(Dominance::Second)
        } else {
            None
        }
    }
}

/// Convenience for [`JointStatistic::from_sketches`].
pub fn extract_joint_statistic(s1: &HllSketch, s2: &HllSketch) -> Result<JointStatistic> {
    JointStatistic::from_sketches(s1, s2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPoint {
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_x: f64,
}

impl PhiPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.phi_a, self.phi_b, self.phi_x]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { phi_a: a[0], phi_b: a[1], phi_x: a[2] }
    }
}

/// Rate terms `x = λ / (m 2^k)`, `y = e^-x`, `z = 1 - y`.
#[derive(Clone, Copy)]
struct Rate {
    x: f64,
    y: f64,
    z: f64,
}

impl Rate {
    #[inline]
    fn new(x: f64) -> Self {
        if x < std::f64::consts::LN_2 {
            let z = -(-x).exp_m1();
            Self { x, y: 1.0 - z, z }
        } else {
            let y = (-x).exp();
            Self { x, y, z: 1.0 - y }
        }
    }
}

/// Log-likelihood of the joint statistic at `point` and its gradient with
/// respect to `(φ_a, φ_b, φ_x)`.
pub fn joint_log_likelihood(point: &PhiPoint, stat: &JointStatistic) -> Result<(f64, [f64; 3])> {
    let m = stat.config.num_registers() as f64;
    let q = stat.config.q() as usize;
    let la = point.phi_a.exp() / m;
    let lb = point.phi_b.exp() / m;
    let lx = point.phi_x.exp() / m;
    let (c1l, c1g, c2l, c2g, ce) = (&stat.c1_less, &stat.c1_greater, &stat.c2_less, &stat.c2_greater, &stat.c_equal);

    let mut f = 0.0;
    let mut g = [0.0; 3];
    // linear terms, weighted by the per-value scale 2^-k
    let mut wa = 0.0;
    let mut wb = 0.0;
    let mut wx = 0.0;
    let mut scale = 1.0;
    for k in 0..=q {
        wa += f64::from(c1l[k] + ce[k] + c1g[k]) * scale;
        wb += f64::from(c2l[k] + ce[k] + c2g[k]) * scale;
        wx += f64::from(c1l[k] + ce[k] + c2l[k]) * scale;
        scale *= 0.5;
    }
    f -= la * wa + lb * wb + lx * wx;
    g[0] -= la * wa;
    g[1] -= lb * wb;
    g[2] -= lx * wx;

    let mut scale = 1.0;
    for k in 1..=q + 1 {
        // values q and q + 1 share the same rate terms
        if k <= q {
            scale *= 0.5;
        }
        let a = Rate::new(la * scale);
        let b = Rate::new(lb * scale);
        let x = Rate::new(lx * scale);
        if c1l[k] > 0 {
            let c = f64::from(c1l[k]);
            let d = x.z + x.y * a.z;
            f += c * d.ln();
            g[0] += c * x.y * a.x * a.y / d;
            g[2] += c * x.x * x.y * a.y / d;
        }
        if c2l[k] > 0 {
            let c = f64::from(c2l[k]);
            let d = x.z + x.y * b.z;
            f += c * d.ln();
            g[1] += c * x.y * b.x * b.y / d;
            g[2] += c * x.x * x.y * b.y / d;
        }
        if c1g[k] > 0 {
            let c = f64::from(c1g[k]);
            f += c * a.z.ln();
            g[0] += c * a.x * a.y / a.z;
        }
        if c2g[k] > 0 {
            let c = f64::from(c2g[k]);
            f += c * b.z.ln();
            g[1] += c * b.x * b.y / b.z;
        }
        if ce[k] > 0 {
            let c = f64::from(ce[k]);
            let d = x.z + x.y * a.z * b.z;
            f += c * d.ln();
            g[0] += c * x.y * a.x * a.y * b.z / d;
            g[1] += c * x.y * b.x * b.y * a.z / d;
            g[2] += c * x.x * x.y * (a.y + a.z * b.y) / d;
        }
    }
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow("joint log-likelihood"));
    }
    Ok((f, g))
}

/// Estimated cardinalities of `A \ B`, `B \ A` and `A ∩ B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateTriple {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_x: f64,
}

impl EstimateTriple {
    pub fn union(&self) -> f64 {
        self.lambda_a + self.lambda_b + self.lambda_x
    }

    pub fn swapped(&self) -> Self {
        Self { lambda_a: self.lambda_b, lambda_b: self.lambda_a, lambda_x: self.lambda_x }
    }
}

/// Inclusion-exclusion estimates. Components may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionExclusion {
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub union: f64,
}

impl InclusionExclusion {
    fn from_estimates(e1: f64, e2: f64, union: f64) -> Self {
        Self { a: union - e2, b: union - e1, x: e1 + e2 - union, union }
    }
}

pub fn inclusion_exclusion_estimates<E: CardinalityEstimator + ?Sized>(
    s1: &HllSketch,
    s2: &HllSketch,
    estimator: &E,
) -> Result<InclusionExclusion> {
    let union = s1.merge(s2)?;
    Ok(InclusionExclusion::from_estimates(
        estimator.estimate(&s1.counts())?,
        estimator.estimate(&s2.counts())?,
        estimator.estimate(&union.counts())?,
    ))
}

/// Inclusion-exclusion with the maximum likelihood estimator, computed from
/// the joint statistic.
pub fn inclusion_exclusion_from_statistic(stat: &JointStatistic, options: &MlOptions) -> InclusionExclusion {
    InclusionExclusion::from_estimates(
        ml_estimate(&stat.first_counts(), options),
        ml_estimate(&stat.second_counts(), options),
        ml_estimate(&stat.union_counts(), options),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOptions {
    pub ml: MlOptions,
    pub max_iterations: usize,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self { ml: MlOptions::default(), max_iterations: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMethod {
    /// No register pair had both values nonzero; single-sketch estimates
    /// were used with a zero intersection.
    Disjoint,
    Optimized { iterations: usize, termination: Termination },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEstimate {
    pub estimates: EstimateTriple,
    pub method: JointMethod,
    /// Set when one sketch dominates the other register-wise. The likelihood
    /// then has no unique maximum in `λ_x`.
    pub dominance: Option<Dominance>,
    pub initial: PhiPoint,
    pub initial_log_likelihood: f64,
    pub log_likelihood: f64,
    pub gradient: [f64; 3],
}

pub fn estimate_joint(s1: &HllSketch, s2: &HllSketch, options: &JointOptions) -> Result<JointEstimate> {
    estimate_joint_from_statistic(&JointStatistic::from_sketches(s1, s2)?, options)
}

pub fn estimate_joint_from_statistic(stat: &JointStatistic, options: &JointOptions) -> Result<JointEstimate> {
    let dominance = stat.dominance();
    if stat.is_disjoint() {
        let estimates = EstimateTriple {
            lambda_a: ml_estimate(&stat.first_counts(), &options.ml),
            lambda_b: ml_estimate(&stat.second_counts(), &options.ml),
            lambda_x: 0.0,
        };
        return Ok(JointEstimate {
            estimates,
            method: JointMethod::Disjoint,
            dominance,
            initial: PhiPoint::from_array([estimates.lambda_a.max(1.0).ln(), estimates.lambda_b.max(1.0).ln(), 0.0]),
            initial_log_likelihood: f64::NAN,
            log_likelihood: f64::NAN,
            gradient: [f64::NAN; 3],
        });
    }
    let ie = inclusion_exclusion_from_statistic(stat, &options.ml);
    let initial = PhiPoint::from_array([ie.a, ie.b, ie.x].map(|v| v.max(1.0).ln()));
    let (initial_log_likelihood, _) = joint_log_likelihood(&initial, stat)?;
    let delta = options.ml.delta(stat.config.num_registers() as u32);
    let objective =
        |p: &[f64; 3]| joint_log_likelihood(&PhiPoint::from_array(*p), stat).unwrap_or((f64::NAN, [f64::NAN; 3]));
    let r = quasi_newton::maximize(objective, initial.as_array(), delta, options.max_iterations)?;
    if !r.converged {
        return Err(Error::NotConverged(r.iterations));
    }
    Ok(JointEstimate {
        estimates: EstimateTriple {
            lambda_a: r.point[0].exp(),
            lambda_b: r.point[1].exp(),
            lambda_x: r.point[2].exp(),
        },
        method: JointMethod::Optimized { iterations: r.iterations, termination: r.termination },
        dominance,
        initial,
        initial_log_likelihood,
        log_likelihood: r.value,
        gradient: r.gradient,
    })
}
