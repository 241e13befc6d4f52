//! Joint maximum likelihood versus inclusion-exclusion on constructed pairs.
//!
//! For true cardinalities `(|A|, |B|, |X|)` of pairwise disjoint sets, each
//! pair consists of the sketches of `A ∪ X` and `B ∪ X`, assembled by merging
//! shuffled pool entries.

use hll_core::joint::{estimate_joint_from_statistic, inclusion_exclusion_from_statistic, JointMethod, JointOptions, JointStatistic};
use hll_core::SketchConfig;

use crate::pool::SketchPool;
use crate::stats::moments;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointCase {
    pub card_a: u64,
    pub card_b: u64,
    pub card_x: u64,
}

impl JointCase {
    pub const fn new(card_a: u64, card_b: u64, card_x: u64) -> Self {
        Self { card_a, card_b, card_x }
    }

    fn truth(&self) -> [f64; 4] {
        let (a, b, x) = (self.card_a as f64, self.card_b as f64, self.card_x as f64);
        [a, b, x, a + b + x]
    }
}

/// Cardinality configurations used by default.
pub const DEFAULT_CASES: [JointCase; 6] = [
    JointCase::new(10_000, 10_000, 10_000),
    JointCase::new(10_000, 10_000, 1_000),
    JointCase::new(1_000, 1_000, 10_000),
    JointCase::new(100_000, 1_000, 1_000),
    JointCase::new(10_000, 10_000, 100),
    JointCase::new(100, 100, 1_000),
];

pub const QUANTITIES: [&str; 4] = ["a", "b", "x", "union"];
pub const METHODS: [&str; 2] = ["incl_excl", "max_like"];

#[derive(Debug, Clone)]
pub struct JointEvalSettings {
    pub config: SketchConfig,
    pub pairs: usize,
    pub seed: u64,
    pub options: JointOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMoments {
    pub mean: f64,
    pub stdev: f64,
    pub rmse: f64,
}

impl ErrorMoments {
    fn of(values: &[f64]) -> Self {
        let (mean, stdev, rmse) = moments(values);
        Self { mean, stdev, rmse }
    }
}

/// Error statistics for one cardinality configuration. Errors are relative
/// to the true value, or absolute where the true value is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfigRow {
    pub case: JointCase,
    pub runs: usize,
    /// Indexed like [`QUANTITIES`].
    pub incl_excl: [ErrorMoments; 4],
    pub max_like: [ErrorMoments; 4],
    /// Ratio of inclusion-exclusion rmse to maximum likelihood rmse.
    pub improvement: [f64; 4],
    /// Pairs for which the optimizer failed; excluded from the statistics.
    pub failures: usize,
    /// Pairs resolved without optimization because no register pair had two
    /// nonzero values.
    pub disjoint_shortcuts: usize,
    pub mean_iterations: f64,
}

impl JointConfigRow {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = ["card_a", "card_b", "card_x", "runs"].map(String::from).to_vec();
        for q in QUANTITIES {
            for m in METHODS {
                for s in ["mean", "stdev", "rmse"] {
                    h.push(format!("{q}_{m}_{s}"));
                }
            }
        }
        h.extend(QUANTITIES.map(|q| format!("improvement_{q}")));
        h.extend(["failures", "disjoint_shortcuts", "mean_iterations"].map(String::from));
        h
    }

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.case.card_a.to_string(),
            self.case.card_b.to_string(),
            self.case.card_x.to_string(),
            self.runs.to_string(),
        ];
        for i in 0..4 {
            for m in [&self.incl_excl[i], &self.max_like[i]] {
                r.extend([m.mean, m.stdev, m.rmse].map(|v| v.to_string()));
            }
        }
        r.extend(self.improvement.map(|v| v.to_string()));
        r.push(self.failures.to_string());
        r.push(self.disjoint_shortcuts.to_string());
        r.push(self.mean_iterations.to_string());
        r
    }
}

/// Pool holding `3 * pairs` entries for every nonzero cardinality of `cases`.
pub fn build_pool(cases: &[JointCase], settings: &JointEvalSettings) -> SketchPool {
    let mut cards: Vec<u64> = cases.iter().flat_map(|c| [c.card_a, c.card_b, c.card_x]).filter(|&n| n > 0).collect();
    cards.sort_unstable();
    cards.dedup();
    SketchPool::generate(settings.config, &cards, 3 * settings.pairs, settings.seed)
}

pub fn eval_joint(cases: &[JointCase], settings: &JointEvalSettings) -> Result<Vec<JointConfigRow>> {
    let pool = build_pool(cases, settings);
    cases.iter().enumerate().map(|(i, case)| eval_case(&pool, *case, i as u64, settings)).collect()
}

pub fn eval_case(pool: &SketchPool, case: JointCase, case_index: u64, settings: &JointEvalSettings) -> Result<JointConfigRow> {
    let truth = case.truth();
    let mut ie_err: [Vec<f64>; 4] = Default::default();
    let mut ml_err: [Vec<f64>; 4] = Default::default();
    let mut failures = 0;
    let mut shortcuts = 0;
    let mut iterations = 0usize;
    let shuffle_seed = settings.seed ^ (case_index + 1).wrapping_mul(0xA24B_AED4_963E_E407);

    for i in 0..settings.pairs {
        let role = |n: u64, r: usize| pool.make_sketch_with_cardinality(n, 3 * i + r, shuffle_seed.wrapping_add(r as u64));
        let a = role(case.card_a, 0)?;
        let x = role(case.card_x, 1)?;
        let b = role(case.card_b, 2)?;
        let stat = JointStatistic::from_sketches(&a.merge(&x)?, &b.merge(&x)?)?;

        let joint = match estimate_joint_from_statistic(&stat, &settings.options) {
            Ok(j) => j,
            Err(hll_core::Error::NotConverged(_) | hll_core::Error::NumericOverflow(_)) => {
                failures += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        match joint.method {
            JointMethod::Disjoint => shortcuts += 1,
            JointMethod::Optimized { iterations: n, .. } => iterations += n,
        }
        let ie = inclusion_exclusion_from_statistic(&stat, &settings.options.ml);
        let e = joint.estimates;
        let ml_est = [e.lambda_a, e.lambda_b, e.lambda_x, e.union()];
        let ie_est = [ie.a, ie.b, ie.x, ie.union];
        for k in 0..4 {
            let scale = truth[k].max(1.0);
            ie_err[k].push((ie_est[k] - truth[k]) / scale);
            ml_err[k].push((ml_est[k] - truth[k]) / scale);
        }
    }

    let incl_excl = ie_err.each_ref().map(|v| ErrorMoments::of(v));
    let max_like = ml_err.each_ref().map(|v| ErrorMoments::of(v));
    let improvement = std::array::from_fn(|k| incl_excl[k].rmse / max_like[k].rmse);
    let runs = ml_err[0].len();
    let optimized = runs - shortcuts;
    Ok(JointConfigRow {
        case,
        runs,
        incl_excl,
        max_like,
        improvement,
        failures,
        disjoint_shortcuts: shortcuts,
        mean_iterations: if optimized > 0 { iterations as f64 / optimized as f64 } else { 0.0 },
    })
}
