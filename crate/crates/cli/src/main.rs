#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Hidden Markov Model analysis of photon-count telegraph signals.
#[derive(Parser, Debug)]
#[command(name = "thmm", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice; required by simulate, fit and
    /// predict --sample.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bin width in seconds [default: 5e-5].
    #[arg(long, global = true)]
    pub bin_width: Option<f64>,
    /// Convergence tolerance on the largest parameter change.
    #[arg(long, global = true, default_value_t = telegraph_hmm::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Iteration cap per Baum-Welch run.
    #[arg(long, global = true, default_value_t = telegraph_hmm::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads for fit restarts.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bin photon timestamps into counts.csv.
    Ingest(IngestArgs),
    /// Simulate a telegraph signal: counts.csv, states.csv and optional
    /// timestamps.
    Simulate(SimulateArgs),
    /// Fit k-state models: model_k<k>.json, fit_k<k>.json, trace_k<k>.csv
    /// and comparison.json.
    Fit(FitArgs),
    /// Filtered, smoothed and aggregated state probabilities.
    Smooth(SmoothArgs),
    /// Predict the counts of hidden bins.
    Predict(PredictArgs),
    /// Compare fits written by `fit` with AIC and BIC.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Format {
    Text,
    Binary,
}

impl From<Format> for telegraph_hmm::TimestampFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => telegraph_hmm::TimestampFormat::Text,
            Format::Binary => telegraph_hmm::TimestampFormat::Binary,
        }
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Timestamp file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seconds per tick.
    #[arg(long, default_value_t = telegraph_hmm::DEFAULT_TICK_RESOLUTION)]
    pub tick_resolution: f64,
    /// Start of the binned span in seconds.
    #[arg(long, requires = "duration")]
    pub start: Option<f64>,
    /// Length of the binned span in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Simulation config JSON; the three-state default model over 20 s
    /// when omitted.
    pub config: Option<PathBuf>,
    /// Number of bins, overriding the config.
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Also write click timestamps.
    #[arg(long)]
    pub timestamps: Option<Format>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Counts CSV.
    pub counts: PathBuf,
    /// State counts to fit.
    #[arg(long, short, value_delimiter = ',', default_value = "3")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Largest count in the emission tables [default: largest observed + 2].
    #[arg(long)]
    pub max_count: Option<usize>,
    /// Clamp counts above --max-count instead of failing.
    #[arg(long, requires = "max_count")]
    pub clamp: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LabelArg {
    HighestMean,
    LargestGap,
    Threshold(f64),
}

fn parse_labels(s: &str) -> Result<LabelArg, String> {
    match s {
        "highest" | "highest-mean" => Ok(LabelArg::HighestMean),
        "gap" | "largest-gap" => Ok(LabelArg::LargestGap),
        _ => match s.strip_prefix("threshold:").map(str::parse::<f64>) {
            Some(Ok(x)) => Ok(LabelArg::Threshold(x)),
            _ => Err(format!("expected highest, gap or threshold:<mean>, got {s:?}")),
        },
    }
}

#[derive(Args, Debug)]
pub struct SmoothArgs {
    /// Counts CSV.
    pub counts: PathBuf,
    /// Model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// How states map to levels: highest, gap or threshold:<mean>.
    #[arg(long, value_parser = parse_labels, default_value = "highest")]
    pub labels: LabelArg,
    /// Clamp counts above the model's largest count instead of failing.
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Counts CSV.
    pub counts: PathBuf,
    /// Model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// 0-based index of the bin to hide.
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    pub bin: Option<usize>,
    /// Hide this many distinct random bins and report mean log-scores.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// fit_k<k>.json files.
    #[arg(required = true, num_args = 2..)]
    pub fits: Vec<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
