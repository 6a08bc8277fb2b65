mod commands;
mod labels;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tailcone::io::Margins;

/// Detect which groups of variables are jointly extreme in multivariate data.
#[derive(Debug, Parser)]
#[command(name = "tailcone", version, about)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Label cones with letters (A, B, ...) instead of 1-based indices.
    #[arg(long, global = true)]
    pub letters: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample from a mixture model; writes CSV plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Estimate cone masses from a CSV sample.
    Fit(FitArgs),
    /// Score fitted masses against known masses.
    Eval(EvalArgs),
    /// Bootstrap cone counts over a grid of tuning values.
    Stability(StabilityArgs),
    /// Print the trivariate tail-index table as CSV.
    TheoryTable(TheoryTableArgs),
    /// Run a seeded simulation study and write its report.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MarginsArg {
    Rank,
    Frechet,
}

impl From<MarginsArg> for Margins {
    fn from(m: MarginsArg) -> Self {
        match m {
            MarginsArg::Rank => Margins::Rank,
            MarginsArg::Frechet => Margins::Frechet,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file, one observation per row (required).
    #[arg(value_name = "DATA")]
    pub data: Option<PathBuf>,
    /// The first CSV row is a header.
    #[arg(long)]
    pub header: bool,
    /// Rank-transform columns, or take values as already standard Fréchet.
    #[arg(long, value_enum, default_value = "rank")]
    pub margins: MarginsArg,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// 1: truncation regions; 2: overlapping regions.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub method: u8,
    /// Truncation quantile (method 1 only).
    #[arg(long)]
    pub p: Option<f64>,
    /// Region exponent (method 2 only).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Per-region threshold quantile.
    #[arg(long)]
    pub u_quantile: Option<f64>,
    /// Extrapolation quantile.
    #[arg(long)]
    pub q_quantile: Option<f64>,
    /// Masses below this are dropped.
    #[arg(long)]
    pub pi: Option<f64>,
    /// Regions with at most this many rows are not fitted.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, env = "TAILCONE_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset such as `maxmix(0.25,0)`, `asymlog(5,3,0.25)` or `logistic(3,0.5)`.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    pub model: Option<String>,
    /// JSON file holding an explicit mixture spec.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, env = "TAILCONE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Sidecar JSON path (default: the output path with a .json extension).
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Output JSON path (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fit result JSON files.
    #[arg(required = true)]
    pub fits: Vec<PathBuf>,
    /// Known masses: a mass JSON file or a simulation sidecar.
    #[arg(long)]
    pub truth: PathBuf,
    /// Threshold for detection counts.
    #[arg(long, default_value_t = 0.01)]
    pub count_pi: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Explicit tuning values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["grid_from", "grid_to", "grid_step"])]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    pub grid_from: f64,
    #[arg(long, default_value_t = 0.95)]
    pub grid_to: f64,
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    /// Bootstrap replicates per grid value.
    #[arg(long, default_value_t = 250)]
    pub replicates: usize,
    /// Output CSV path (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryTableArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Model preset, as for `simulate`.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    pub model: Option<String>,
    /// JSON file holding a complete experiment description.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 20, conflicts_with = "full")]
    pub replicates: usize,
    /// Run the full-scale study of 100 replicates.
    #[arg(long)]
    pub full: bool,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2u8],
          value_parser = clap::value_parser!(u8).range(1..=2))]
    pub methods: Vec<u8>,
    /// Metrics to compute, comma separated: hellinger, auc, counts.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    /// Threshold for detection counts.
    #[arg(long, default_value_t = 0.01)]
    pub count_pi: f64,
    #[arg(long, env = "TAILCONE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.json and replicates.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(e)) => e.exit(),
        Err(commands::Failure::Library(e)) => {
            eprintln!("error: {e}");
            match e.kind() {
                tailcone::ErrorKind::Data => ExitCode::from(3),
                tailcone::ErrorKind::Model => ExitCode::from(4),
            }
        }
    }
}
