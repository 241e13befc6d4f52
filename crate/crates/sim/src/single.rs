//! Relative error of single-sketch estimators over a cardinality grid.

use std::fmt;
use std::str::FromStr;

use hll_core::estimation::{improved_raw_estimate, ml_estimate_detailed, original_estimate, MlOptions};
use hll_core::special::CorrectionTables;
use hll_core::{MultiplicityVector, SketchConfig};

use crate::simulate::{simulate_run, RecordMode};
use crate::stats::Summary;
use crate::{Result, SimError, SnapshotSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Original,
    ImprovedRaw,
    ImprovedRawTables,
    Ml,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [Self::Original, Self::ImprovedRaw, Self::ImprovedRawTables, Self::Ml];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Original => "original",
            Self::ImprovedRaw => "improved-raw",
            Self::ImprovedRawTables => "improved-raw-tables",
            Self::Ml => "ml",
        }
    }

    /// Whether estimates never decrease as elements are added. The maximum
    /// likelihood estimate is monotone up to its stop tolerance.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, Self::Original)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::InvalidArgument(format!("unknown estimator {s:?}")))
    }
}

/// Evaluates the estimators it was built for on one multiplicity vector.
struct Evaluator {
    tables: Option<CorrectionTables>,
    ml: MlOptions,
}

impl Evaluator {
    fn new(kinds: &[EstimatorKind], config: SketchConfig, ml: MlOptions) -> Self {
        let tables = kinds
            .contains(&EstimatorKind::ImprovedRawTables)
            .then(|| CorrectionTables::new(config.num_registers() as u32));
        Self { tables, ml }
    }

    /// Estimate and number of secant iterations.
    fn estimate(&self, kind: EstimatorKind, c: &MultiplicityVector) -> hll_core::Result<(f64, u32)> {
        match kind {
            EstimatorKind::Original => original_estimate(c).map(|v| (v, 0)),
            EstimatorKind::ImprovedRaw => Ok((improved_raw_estimate(c), 0)),
            EstimatorKind::ImprovedRawTables => {
                let t = self.tables.as_ref().expect("tables built for this estimator");
                hll_core::estimation::improved_raw_estimate_with_tables(c, t).map(|v| (v, 0))
            }
            EstimatorKind::Ml => {
                let r = ml_estimate_detailed(c, &self.ml);
                Ok((r.cardinality, r.iterations))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SingleEvalSettings {
    pub config: SketchConfig,
    pub runs: u64,
    pub schedule: SnapshotSchedule,
    pub seed: u64,
    pub mode: RecordMode,
    pub ml: MlOptions,
}

/// Relative error statistics at one true cardinality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStatsRow {
    pub true_cardinality: u64,
    pub runs: usize,
    pub mean: f64,
    pub stdev: f64,
    pub median: f64,
    pub q01: f64,
    pub q05: f64,
    pub q95: f64,
    pub q99: f64,
}

impl ErrorStatsRow {
    pub const HEADER: [&'static str; 9] =
        ["true_cardinality", "runs", "mean", "stdev", "median", "q01", "q05", "q95", "q99"];

    pub fn from_errors(true_cardinality: u64, errors: &[f64]) -> Self {
        let s = Summary::of(errors);
        Self {
            true_cardinality,
            runs: s.count,
            mean: s.mean,
            stdev: s.stdev,
            median: s.median,
            q01: s.q01,
            q05: s.q05,
            q95: s.q95,
            q99: s.q99,
        }
    }

    pub fn record(&self) -> Vec<String> {
        let mut out = vec![self.true_cardinality.to_string(), self.runs.to_string()];
        out.extend([self.mean, self.stdev, self.median, self.q01, self.q05, self.q95, self.q99].map(|v| v.to_string()));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub kind: EstimatorKind,
    pub rows: Vec<ErrorStatsRow>,
    /// Snapshots where the estimator returned an error, left out of `rows`.
    pub failures: u64,
    /// Snapshots whose estimate fell below the previous one of the same run,
    /// beyond the stop tolerance for the maximum likelihood estimator.
    pub monotonicity_violations: u64,
    /// Largest number of secant iterations of any maximum likelihood call.
    pub max_iterations: u32,
}

/// Runs `settings.runs` independent streams and evaluates every estimator in
/// `kinds` at each snapshot.
pub fn evaluate_single(kinds: &[EstimatorKind], settings: &SingleEvalSettings) -> Result<Vec<EstimatorReport>> {
    let points = settings.schedule.points();
    let evaluator = Evaluator::new(kinds, settings.config, settings.ml);
    let delta = settings.ml.delta(settings.config.num_registers() as u32);
    let runs = settings.runs as usize;
    // errors[estimator][point] holds one relative error per run
    let mut errors = vec![vec![Vec::with_capacity(runs); points.len()]; kinds.len()];
    let mut reports: Vec<EstimatorReport> = kinds
        .iter()
        .map(|&kind| EstimatorReport { kind, rows: Vec::new(), failures: 0, monotonicity_violations: 0, max_iterations: 0 })
        .collect();

    for run in 0..settings.runs {
        let mut prev = vec![0.0f64; kinds.len()];
        let mut index = 0;
        let mut failure = None;
        simulate_run(settings.seed, run, settings.config, &settings.schedule, settings.mode, |n, counts| {
            for (e, &kind) in kinds.iter().enumerate() {
                match evaluator.estimate(kind, counts) {
                    Ok((est, iterations)) => {
                        let report = &mut reports[e];
                        report.max_iterations = report.max_iterations.max(iterations);
                        let floor = if kind == EstimatorKind::Ml { prev[e] * (1.0 - delta) } else { prev[e] };
                        if kind.is_monotone() && est < floor {
                            report.monotonicity_violations += 1;
                        }
                        prev[e] = est;
                        if n > 0 {
                            errors[e][index].push((est - n as f64) / n as f64);
                        }
                    }
                    Err(hll_core::Error::CorrectionDomainExceeded { .. }) => reports[e].failures += 1,
                    Err(err) => failure = Some(err),
                }
            }
            index += 1;
        })?;
        if let Some(err) = failure {
            return Err(err.into());
        }
    }

    for (report, errs) in reports.iter_mut().zip(&errors) {
        report.rows = points
            .iter()
            .zip(errs)
            .filter(|&(&n, e)| n > 0 && !e.is_empty())
            .map(|(&n, e)| ErrorStatsRow::from_errors(n, e))
            .collect();
    }
    Ok(reports)
}

/// Error statistics of a single estimator. With zero runs the result is empty.
pub fn eval_single(kind: EstimatorKind, settings: &SingleEvalSettings) -> Result<Vec<ErrorStatsRow>> {
    let mut reports = evaluate_single(&[kind], settings)?;
    Ok(reports.remove(0).rows)
}
