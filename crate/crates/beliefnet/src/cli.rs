//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a run fails, 2 for usage, configuration
//! and input-format errors. Outputs are written only once a command has fully
//! succeeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use beliefnet_core::analysis::{
    component_sizes, degree_distribution, diameter, fit_power_law, DEFAULT_SAMPLE_PAIRS,
};
use beliefnet_core::engine::run_simulation;
use beliefnet_core::experiments::preset;
use beliefnet_core::{seeded_rng, FigureId, Scale};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::{json, Map, Value};

use crate::config::{load_config, ConfigFile};
use crate::dump::{read_file, write_network};
use crate::output::{
    distance_json, figure_csv, figure_fits_json, fit_json, histogram_csv, histogram_json,
    json_number, pretty, trace_csv, OutputSet,
};
use crate::runner::{experiment_meta, run_experiment, thread_pool};

#[derive(Debug, Parser)]
#[command(
    name = "beliefnet",
    version,
    about = "Grow and analyse signed belief networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation from a TOML configuration.
    Run(RunArgs),
    /// Reproduce a figure's data from its preset.
    Experiment(ExperimentArgs),
    /// Print metrics of a dumped network as JSON.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override a configuration key after loading, e.g. `--set n_points=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed, replacing the configuration's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Where to write the final network (default: `<out>/network.dump`).
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Full,
    Desk,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Full => Scale::Full,
            ScaleArg::Desk => Scale::Desk,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Figure id: 1a, 1b-type1, 1b-type2, 2, 3, 4, 5, 6 or 7.
    pub id: String,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    pub scale: ScaleArg,
    /// Number of runs, replacing the preset's.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed; run `r` uses `seed + r`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default: `results/<id>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write every run's final network under `<out>/dumps/`.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Histogram,
    Fit,
    Diameter,
    Components,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Network dump to analyse.
    pub dump: PathBuf,
    /// Metrics to compute.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "histogram,fit,diameter,components"
    )]
    pub metrics: Vec<Metric>,
    /// Seed for sampled distances on large networks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pairs sampled when the largest component is too big for exact distances.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_PAIRS)]
    pub sample_pairs: usize,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration or input files.
    Usage(anyhow::Error),
    /// The work itself failed.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    }
}

fn write_outputs(files: &OutputSet, dir: &Path) -> Result<(), Failure> {
    files
        .write(dir)
        .with_context(|| format!("writing outputs to {}", dir.display()))
        .map_err(runtime)?;
    let names: Vec<String> = files.names().map(|p| p.display().to_string()).collect();
    info!("wrote {} to {}", names.join(", "), dir.display());
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let mut config = load_config(&args.config, &args.set).map_err(usage)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if config.has_fitness_above_one() {
        warn!("fitness above 1 is outside the nominal range; runs proceed unchanged");
    }
    let start = std::time::Instant::now();
    let run = run_simulation(&config).map_err(runtime)?;
    let wall = start.elapsed();

    let net = &run.network;
    let mut files = OutputSet::new();
    let dump = write_network(net);
    if net.is_empty() {
        warn!("the network is empty; no degree histogram is written");
    } else {
        let hist = degree_distribution(net).map_err(runtime)?;
        files.add("histogram.csv", histogram_csv(&hist));
    }
    files.add("trace.csv", trace_csv(&run.trace));
    let attached = run.trace.iter().filter(|c| c.attached).count();
    let meta = json!({
        "config": ConfigFile::from_sim(&config),
        "seed": config.seed,
        "wall_time_secs": json_number(wall.as_secs_f64()),
        "summary": {
            "vertices": net.vertex_count(),
            "edges": net.edge_count(),
            "inputs_attached": attached,
            "inputs_rejected": run.trace.len() - attached,
            "time_used": run.trace.iter().map(|c| u64::from(c.time_used)).sum::<u64>(),
        },
    });
    files.add("meta.json", pretty(&meta));
    match &args.dump {
        None => files.add("network.dump", dump),
        Some(path) => {
            write_outputs(&files, &args.out)?;
            std::fs::write(path, dump)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(runtime)?;
            info!("wrote network dump to {}", path.display());
            return Ok(());
        }
    }
    write_outputs(&files, &args.out)
}

fn valid_ids() -> String {
    FigureId::ALL.map(FigureId::as_str).join(", ")
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let figure =
        FigureId::parse(&args.id).map_err(|e| usage(anyhow!("{e}; valid ids: {}", valid_ids())))?;
    let mut spec = preset(figure, args.scale.into());
    if let Some(runs) = args.runs {
        spec.runs = runs;
    }
    spec.seed = args.seed;
    spec.validate().map_err(usage)?;
    if args.jobs == Some(0) {
        return Err(usage(anyhow!("--jobs must be at least 1")));
    }
    let pool = thread_pool(args.jobs).map_err(runtime)?;
    info!(
        "figure {figure}: {} variant(s) x {} run(s) at {} scale",
        spec.variants(),
        spec.runs,
        spec.scale.as_str()
    );
    let outcome = run_experiment(&spec, &pool, args.dump).map_err(runtime)?;

    let mut files = OutputSet::new();
    files.add("data.csv", figure_csv(&outcome.data));
    if let Some(fits) = figure_fits_json(&outcome.data) {
        files.add("fit.json", pretty(&fits));
    }
    files.add("meta.json", pretty(&experiment_meta(&spec, &outcome)));
    for (unit, net) in &outcome.networks {
        let name = format!(
            "dumps/{}-run{}.dump",
            spec.variant_label(unit.variant),
            unit.run
        );
        files.add(name, write_network(net));
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(figure.as_str()));
    write_outputs(&files, &out)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let net = read_file(&args.dump)
        .with_context(|| format!("loading {}", args.dump.display()))
        .map_err(usage)?;
    let mut report = Map::new();
    report.insert("vertices".into(), json!(net.vertex_count()));
    report.insert("edges".into(), json!(net.edge_count()));
    let failed = |e: beliefnet_core::Error| json!({ "error": e.to_string() });
    for metric in &args.metrics {
        let (key, value) = match metric {
            Metric::Histogram => (
                "histogram",
                degree_distribution(&net).map_or_else(failed, |h| histogram_json(&h)),
            ),
            Metric::Fit => (
                "fit",
                degree_distribution(&net)
                    .and_then(|h| {
                        let (lo, hi) = h.default_fit_window();
                        fit_power_law(&h, lo, hi)
                    })
                    .map_or_else(failed, |f| fit_json(&f)),
            ),
            Metric::Diameter => {
                let mut rng = seeded_rng(args.seed);
                (
                    "diameter",
                    diameter(&net, Some(args.sample_pairs), &mut rng)
                        .map_or_else(failed, |d| distance_json(&d)),
                )
            }
            Metric::Components => ("components", json!(component_sizes(&net))),
        };
        report.insert(key.into(), value);
    }
    print!("{}", pretty(&Value::Object(report)));
    Ok(())
}
