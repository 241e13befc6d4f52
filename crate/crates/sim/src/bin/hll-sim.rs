use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hll_core::estimation::{
    improved_raw_estimate, improved_raw_estimate_with_tables, ml_estimate_detailed, original_estimate, MlOptions,
};
use hll_core::hashing::Xxh3Hasher;
use hll_core::joint::{estimate_joint, inclusion_exclusion_estimates, JointOptions};
use hll_core::special::CorrectionTables;
use hll_core::{HllSketch, SketchConfig};
use hll_sim::joint_eval::{eval_joint, JointCase, JointConfigRow, JointEvalSettings, DEFAULT_CASES};
use hll_sim::output::{write_csv_file, Metadata};
use hll_sim::simulate::{random_sketch, simulate_run, RecordMode};
use hll_sim::single::{evaluate_single, ErrorStatsRow, EstimatorKind, SingleEvalSettings};
use hll_sim::{Result, SimError, SnapshotSchedule, DEFAULT_RATIO};

#[derive(Parser)]
#[command(name = "hll-sim", version, about = "Simulation harness for HyperLogLog cardinality estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record the multiplicity vector of random streams at every snapshot.
    Simulate(SimulateArgs),
    /// Relative error statistics of one estimator over the snapshot grid.
    EvalSingle(EvalSingleArgs),
    /// Joint maximum likelihood versus inclusion-exclusion on sketch pairs.
    EvalJoint(EvalJointArgs),
    /// Build a sketch from the lines of a text file, or from random values.
    Sketch(SketchArgs),
    /// Print the estimates of every estimator for one or two sketch files.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 12)]
    p: u8,
    #[arg(long, default_value_t = 20)]
    q: u8,
}

impl ConfigArgs {
    fn config(&self) -> Result<SketchConfig> {
        Ok(SketchConfig::new(self.p, self.q)?)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest cardinality of the snapshot grid; accepts forms like 1e7.
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    max_n: u64,
    /// Factor between consecutive grid points beyond 10.
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    ratio: f64,
    /// Record at (22, 42) and compress to the target at each snapshot.
    #[arg(long)]
    via_compress: bool,
}

impl GridArgs {
    fn schedule(&self) -> Result<SnapshotSchedule> {
        SnapshotSchedule::geometric(self.max_n, self.ratio)
    }

    fn mode(&self) -> RecordMode {
        if self.via_compress {
            RecordMode::ViaCompress
        } else {
            RecordMode::Direct
        }
    }

    fn metadata(&self, config: SketchConfig) -> Metadata {
        Metadata::new(self.seed, config)
            .with("runs", self.runs)
            .with("max_n", self.max_n)
            .with("ratio", self.ratio)
            .with("via_compress", self.via_compress)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalSingleArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// One of original, improved-raw, improved-raw-tables, ml.
    #[arg(long, default_value = "improved-raw")]
    estimator: EstimatorKind,
    /// Use σ/τ lookup tables for the improved raw estimator.
    #[arg(long)]
    tables: bool,
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalJointArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of sketch pairs per configuration.
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cardinalities `A,B,X` of the disjoint parts; repeatable. Defaults to
    /// six configurations between 10^2 and 10^5.
    #[arg(long = "config", value_parser = parse_case)]
    configs: Vec<JointCase>,
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SketchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Text file whose distinct lines are inserted; `-` reads stdin.
    #[arg(long, conflicts_with = "random")]
    input: Option<PathBuf>,
    /// Insert this many pseudo-random values instead of reading input.
    #[arg(long, value_parser = parse_count)]
    random: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    file: PathBuf,
    second: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("not a non-negative integer: {s}")),
    }
}

fn parse_case(s: &str) -> std::result::Result<JointCase, String> {
    let parts: Vec<u64> = s.split(',').map(|v| parse_count(v.trim())).collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [a, b, x] => Ok(JointCase::new(a, b, x)),
        _ => Err(format!("expected A,B,X, got {s}")),
    }
}

fn ml_options(epsilon: f64) -> Result<MlOptions> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SimError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(MlOptions { epsilon })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = args.config.config()?;
    let schedule = args.grid.schedule()?;
    let mut header = vec!["run".to_string(), "n".to_string()];
    header.extend((0..=config.q() as usize + 1).map(|k| format!("c{k}")));
    let mut rows = Vec::new();
    for run in 0..args.grid.runs {
        simulate_run(args.grid.seed, run, config, &schedule, args.grid.mode(), |n, c| {
            let mut row = vec![run.to_string(), n.to_string()];
            row.extend(c.counts().iter().map(u32::to_string));
            rows.push(row);
        })?;
    }
    write_csv_file(&args.out, &args.grid.metadata(config), &header, rows)
}

fn eval_single_cmd(args: &EvalSingleArgs) -> Result<()> {
    let config = args.config.config()?;
    let kind = match (args.estimator, args.tables) {
        (EstimatorKind::ImprovedRaw, true) => EstimatorKind::ImprovedRawTables,
        (k, true) if k != EstimatorKind::ImprovedRawTables => {
            return Err(SimError::InvalidArgument(format!("--tables does not apply to {k}")));
        }
        (k, _) => k,
    };
    let settings = SingleEvalSettings {
        config,
        runs: args.grid.runs,
        schedule: args.grid.schedule()?,
        seed: args.grid.seed,
        mode: args.grid.mode(),
        ml: ml_options(args.epsilon)?,
    };
    let report = evaluate_single(&[kind], &settings)?.remove(0);
    let mut meta = args.grid.metadata(config).with("estimator", kind);
    if kind == EstimatorKind::Ml {
        meta = meta.with("epsilon", args.epsilon);
    }
    let meta = meta
        .with("failures", report.failures)
        .with("monotonicity_violations", report.monotonicity_violations);
    write_csv_file(&args.out, &meta, &ErrorStatsRow::HEADER, report.rows.iter().map(ErrorStatsRow::record))
}

fn eval_joint_cmd(args: &EvalJointArgs) -> Result<()> {
    let config = args.config.config()?;
    let cases = if args.configs.is_empty() { DEFAULT_CASES.to_vec() } else { args.configs.clone() };
    let settings = JointEvalSettings {
        config,
        pairs: args.runs,
        seed: args.seed,
        options: JointOptions { ml: ml_options(args.epsilon)?, max_iterations: args.max_iterations },
    };
    let rows = eval_joint(&cases, &settings)?;
    let meta = Metadata::new(args.seed, config).with("runs", args.runs).with("epsilon", args.epsilon);
    write_csv_file(&args.out, &meta, &JointConfigRow::header(), rows.iter().map(JointConfigRow::record))
}

fn sketch_cmd(args: &SketchArgs) -> Result<()> {
    let config = args.config.config()?;
    let sketch = match (&args.input, args.random) {
        (_, Some(n)) => random_sketch(args.seed, 0, config, n),
        (Some(path), None) => {
            let reader: Box<dyn BufRead> = if path == Path::new("-") {
                Box::new(std::io::stdin().lock())
            } else {
                Box::new(BufReader::new(std::fs::File::open(path)?))
            };
            let hasher = Xxh3Hasher::with_seed(args.seed);
            let mut sketch = HllSketch::new(config);
            for line in reader.lines() {
                sketch.insert_with(&hasher, line?.as_bytes());
            }
            sketch
        }
        (None, None) => return Err(SimError::InvalidArgument("one of --input or --random is required".into())),
    };
    std::fs::write(&args.out, sketch.to_bytes())?;
    Ok(())
}

fn read_sketch(path: &Path) -> Result<HllSketch> {
    Ok(HllSketch::from_bytes(&std::fs::read(path)?)?)
}

fn show(r: hll_core::Result<f64>) -> String {
    r.map_or_else(|e| format!("error: {e}"), |v| v.to_string())
}

fn estimate_cmd(args: &EstimateArgs) -> Result<()> {
    let ml = ml_options(args.epsilon)?;
    let first = read_sketch(&args.file)?;
    let config = first.config();
    let tables = CorrectionTables::new(config.num_registers() as u32);
    let single = |label: &str, sketch: &HllSketch| {
        let c = sketch.counts();
        let r = ml_estimate_detailed(&c, &ml);
        println!("{label} {config}");
        println!("  original             {}", show(original_estimate(&c)));
        println!("  improved-raw         {}", improved_raw_estimate(&c));
        println!("  improved-raw-tables  {}", show(improved_raw_estimate_with_tables(&c, &tables)));
        println!("  ml                   {} ({} iterations)", r.cardinality, r.iterations);
    };
    single("sketch 1", &first);
    let Some(path) = &args.second else { return Ok(()) };

    let second = read_sketch(path)?;
    single("sketch 2", &second);
    let joint = estimate_joint(&first, &second, &JointOptions { ml, ..JointOptions::default() })?;
    let ie = inclusion_exclusion_estimates(&first, &second, &hll_core::estimation::MlEstimator { options: ml })?;
    let e = joint.estimates;
    println!("joint                  ml                   inclusion-exclusion");
    for (name, a, b) in [
        ("only in 1", e.lambda_a, ie.a),
        ("only in 2", e.lambda_b, ie.b),
        ("intersection", e.lambda_x, ie.x),
        ("union", e.union(), ie.union),
    ] {
        println!("  {name:<20} {a:<20} {b}");
    }
    if let Some(d) = joint.dominance {
        println!("  note: {d:?} sketch dominates register-wise; the intersection is not identifiable");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::EvalSingle(a) => eval_single_cmd(a),
        Command::EvalJoint(a) => eval_joint_cmd(a),
        Command::Sketch(a) => sketch_cmd(a),
        Command::Estimate(a) => estimate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hll-sim: {e}");
            ExitCode::FAILURE
        }
    }
}
