//! Command-line front end: dataset generation, model training, single
//! solves, Monte-Carlo benchmarks, and beampattern export.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use qpskbeam::array::{random_scenario, sample_covariance, steering_vector, synthesize_snapshots, ArrayGeometry, Scenario};
use qpskbeam::beamformer::capon_weights;
use qpskbeam::bench::{
    export_beampattern_grid, format_table, run_benchmark, run_trial, MethodId, TrialOptions,
};
use qpskbeam::config::CliConfig;
use qpskbeam::error::{Error, Result};
use qpskbeam::policy::{generate_dataset, load_model, save_model, train_gbdt, GbdtModel, TrainingDataset};
use qpskbeam::linalg::inner;

fn parse_method(s: &str) -> std::result::Result<MethodId, Error> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "qpskbeam",
    version,
    about = "Phase-quantized (QPSK) anti-jamming beamforming toolkit"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Cap worker threads (default: all available cores).
    #[arg(long, global = true, value_name = "COUNT")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an oracle-labeled training dataset (JSON lines).
    Dataset(DatasetArgs),
    /// Train per-antenna classifiers from a dataset file.
    Train(TrainArgs),
    /// Solve one scenario with one method and print the result as JSON.
    Solve(SolveArgs),
    /// Run the Monte-Carlo benchmark and print the summary table.
    Bench(BenchArgs),
    /// Export a beampattern grid CSV for one scenario and method.
    Pattern(PatternArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Array size.
    #[arg(long)]
    n: Option<usize>,
    /// Number of rows to generate.
    #[arg(long)]
    count: Option<usize>,
    /// Output JSONL path.
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Input dataset (JSONL).
    #[arg(long)]
    dataset: PathBuf,
    /// Output model path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Boosting rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Maximum tree depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Learning rate in (0, 1].
    #[arg(long)]
    lr: Option<f64>,
    /// Minimum rows per leaf.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Seed recorded in model metadata.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Array size.
    #[arg(long)]
    n: Option<usize>,
    /// Solver: capon, naive, oracle, greedy, coord_descent, gbdt_refine.
    #[arg(long, value_parser = parse_method)]
    method: MethodId,
    /// Scenario JSON file; omitted = draw one from the configured ranges.
    #[arg(long, value_name = "PATH")]
    scenario_json: Option<PathBuf>,
    /// Model file (required for gbdt_refine).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Seed for the drawn scenario and the greedy solver.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Array size.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory for summary.json and trials.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated method list.
    #[arg(long, value_parser = parse_method, value_delimiter = ',')]
    methods: Option<Vec<MethodId>>,
    /// Number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Model file (required when methods include gbdt_refine).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Random candidates for the greedy solver.
    #[arg(long)]
    greedy_samples: Option<usize>,
}

#[derive(Args)]
struct PatternArgs {
    /// Array size.
    #[arg(long)]
    n: Option<usize>,
    /// Scenario JSON file; omitted = draw one from the configured ranges.
    #[arg(long, value_name = "PATH")]
    scenario_json: Option<PathBuf>,
    /// Solver whose pattern to export.
    #[arg(long, value_parser = parse_method)]
    method: MethodId,
    /// Grid resolution in degrees.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Model file (required for gbdt_refine).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Seed for the drawn scenario and the greedy solver.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = CliConfig::load(cli.config.as_deref())?;
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(k) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match cli.cmd {
        Cmd::Dataset(args) => cmd_dataset(cfg, args),
        Cmd::Train(args) => cmd_train(cfg, args),
        Cmd::Solve(args) => cmd_solve(cfg, args),
        Cmd::Bench(args) => cmd_bench(cfg, args),
        Cmd::Pattern(args) => cmd_pattern(cfg, args),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn config_echo(cfg: &CliConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn cmd_dataset(mut cfg: CliConfig, args: DatasetArgs) -> Result<()> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(count) = args.count {
        cfg.dataset_rows = count;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let geom = ArrayGeometry::uniform_circular(cfg.n)?;
    let ds = generate_dataset(
        &cfg.dist,
        cfg.dataset_rows,
        &geom,
        &cfg.objective_params(),
        cfg.seed,
    )?;
    ds.write_jsonl(&args.out)?;

    // Label distribution: per antenna, how often each class was optimal.
    let mut counts = vec![[0usize; 4]; cfg.n];
    for row in ds.rows() {
        for (a, &l) in row.labels.iter().enumerate() {
            counts[a][l as usize] += 1;
        }
    }
    print_json(&json!({
        "version": qpskbeam::VERSION,
        "config": config_echo(&cfg),
        "out": args.out.display().to_string(),
        "rows": ds.len(),
        "fingerprint": ds.fingerprint(),
        "label_distribution": counts,
    }));
    Ok(())
}

fn cmd_train(mut cfg: CliConfig, args: TrainArgs) -> Result<()> {
    if let Some(v) = args.rounds {
        cfg.rounds = v;
    }
    if let Some(v) = args.depth {
        cfg.max_depth = v;
    }
    if let Some(v) = args.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = args.min_leaf {
        cfg.min_leaf = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    let tc = cfg.training_config();
    tc.validate()?;

    let ds = TrainingDataset::read_jsonl(&args.dataset)?;
    // Hold out the last 20% of rows for the accuracy report; the model is
    // trained on the remaining 80%.
    let heldout_rows = ds.len() / 5;
    let (train_ds, heldout) = ds.split_tail(heldout_rows);
    let train_ds = if train_ds.is_empty() { ds.clone() } else { train_ds };
    let model = train_gbdt(&train_ds, &tc)?;
    save_model(&model, &args.out)?;

    let accuracy: Option<Vec<f64>> = if heldout.is_empty() {
        None
    } else {
        let mut correct = vec![0usize; ds.n()];
        for row in heldout.rows() {
            for (a, clf) in model.classifiers.iter().enumerate() {
                if clf.predict(&row.features) == row.labels[a] {
                    correct[a] += 1;
                }
            }
        }
        Some(
            correct
                .iter()
                .map(|&c| c as f64 / heldout.len() as f64)
                .collect(),
        )
    };
    print_json(&json!({
        "version": qpskbeam::VERSION,
        "config": config_echo(&cfg),
        "dataset": args.dataset.display().to_string(),
        "dataset_fingerprint": ds.fingerprint(),
        "rows": ds.len(),
        "train_rows": train_ds.len(),
        "heldout_rows": heldout.len(),
        "heldout_accuracy_per_antenna": accuracy,
        "model_out": args.out.display().to_string(),
        "warnings": model.metadata.warnings,
    }));
    Ok(())
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&display, e.to_string()))
}

fn scenario_from(cfg: &CliConfig, path: Option<&Path>) -> Result<Scenario> {
    match path {
        Some(p) => load_scenario(p),
        None => random_scenario(&cfg.dist, cfg.seed),
    }
}

fn load_model_if(path: Option<&Path>, method: MethodId) -> Result<Option<GbdtModel>> {
    match (path, method) {
        (Some(p), _) => Ok(Some(load_model(p)?)),
        (None, MethodId::GbdtRefine) => Err(Error::InvalidArgument(
            "--method gbdt_refine requires --model".into(),
        )),
        (None, _) => Ok(None),
    }
}

fn cmd_solve(mut cfg: CliConfig, args: SolveArgs) -> Result<()> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    cfg.validate()?;
    let geom = ArrayGeometry::uniform_circular(cfg.n)?;
    let sc = scenario_from(&cfg, args.scenario_json.as_deref())?;
    let model = load_model_if(cfg.model.as_deref(), args.method)?;
    let methods = [args.method];
    let opt = TrialOptions {
        methods: &methods,
        params: cfg.objective_params(),
        model: model.as_ref(),
        greedy_samples: cfg.greedy_samples,
        cd_sweeps: cfg.cd_sweeps,
        refine_sweeps: cfg.refine_sweeps,
        grid: cfg.grid(),
        seed: cfg.seed,
    };
    let trial = run_trial(&geom, &sc, &opt)?;
    let outcome = &trial.outcomes[0];

    // Distortionless check for the continuous beamformer: w^H a_g = 1.
    let constraint_error: Option<f64> = if args.method == MethodId::Capon {
        let batch = synthesize_snapshots(&geom, &sc)?;
        let r = sample_covariance(&batch);
        let a_g = steering_vector(&geom, &sc.sat_dir);
        let w = capon_weights(&r, &a_g, &cfg.objective_params())?;
        Some((inner(&w, &a_g) - Complex64::new(1.0, 0.0)).norm())
    } else {
        None
    };

    print_json(&json!({
        "version": qpskbeam::VERSION,
        "config": config_echo(&cfg),
        "method": args.method.name(),
        "scenario": sc,
        "symbols": outcome.symbols,
        "weights": outcome.weights,
        "objective": outcome.objective,
        "sat_gain_db": outcome.sat_gain_db,
        "intf_gain_db": outcome.intf_gain_db,
        "latency_ns": outcome.latency_ns,
        "constraint_error": constraint_error,
    }));
    Ok(())
}

fn cmd_bench(mut cfg: CliConfig, args: BenchArgs) -> Result<()> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(methods) = args.methods {
        cfg.methods = methods;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.model.is_some() {
        cfg.model = args.model;
    }
    if args.out_dir.is_some() {
        cfg.out_dir = args.out_dir;
    }
    if let Some(gs) = args.greedy_samples {
        cfg.greedy_samples = gs;
    }
    cfg.validate()?;
    let bench = cfg.bench_config();
    bench.validate()?;
    let summary = run_benchmark(&bench)?;
    print!("{}", format_table(&summary));
    if let Some(dir) = &bench.out_dir {
        eprintln!(
            "wrote {} and {}",
            dir.join("summary.json").display(),
            dir.join("trials.csv").display()
        );
    }
    Ok(())
}

fn cmd_pattern(mut cfg: CliConfig, args: PatternArgs) -> Result<()> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(step) = args.grid_step {
        cfg.grid_step_deg = step;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    cfg.validate()?;
    let geom = ArrayGeometry::uniform_circular(cfg.n)?;
    let sc = scenario_from(&cfg, args.scenario_json.as_deref())?;
    let model = load_model_if(cfg.model.as_deref(), args.method)?;
    let methods = [args.method];
    let opt = TrialOptions {
        methods: &methods,
        params: cfg.objective_params(),
        model: model.as_ref(),
        greedy_samples: cfg.greedy_samples,
        cd_sweeps: cfg.cd_sweeps,
        refine_sweeps: cfg.refine_sweeps,
        grid: cfg.grid(),
        seed: cfg.seed,
    };
    let trial = run_trial(&geom, &sc, &opt)?;
    let outcome = &trial.outcomes[0];
    let w: Vec<Complex64> = match (&outcome.weights, &outcome.symbols) {
        (Some(pairs), _) => pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
        (None, Some(symbols)) => qpskbeam::beamformer::QpskWeights::new(symbols.clone())?.to_complex(),
        (None, None) => unreachable!("every outcome carries symbols or weights"),
    };
    let notes = vec![
        format!("method: {}", args.method.name()),
        format!("scenario: {}", serde_json::to_string(&sc).expect("scenario serializes")),
        format!("config: {}", serde_json::to_string(&cfg).expect("config serializes")),
    ];
    export_beampattern_grid(&w, &geom, &cfg.grid(), &args.out, &notes)?;
    let grid = cfg.grid();
    println!(
        "{}",
        json!({
            "version": qpskbeam::VERSION,
            "out": args.out.display().to_string(),
            "method": args.method.name(),
            "rows": grid.azimuths().len() * grid.elevations().len(),
            "sat_gain_db": outcome.sat_gain_db,
            "intf_gain_db": outcome.intf_gain_db,
        })
    );
    Ok(())
}
