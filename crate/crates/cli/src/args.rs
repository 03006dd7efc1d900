use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "radarnas",
    version,
    about = "Radar object classification from spectra and reflections"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file layered over the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving every output of the command.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Global seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate raw radar recordings.
    Simulate(SimulateArgs),
    /// Turn raw recordings into the split-tagged ROI dataset.
    Preprocess(PreprocessArgs),
    /// Train a model several times and report test confusion matrices.
    Train(TrainArgs),
    /// Multi-objective architecture search over spectrum models.
    Nas(NasArgs),
    /// Evaluate saved checkpoints; two sets give a side-by-side table.
    Eval(EvalArgs),
    /// k-nearest-neighbour baseline.
    Knn(DataArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Total tracks, split across classes in the default ratios.
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..))]
    pub tracks: Option<u64>,
    /// Car tracks; overrides the share from --tracks.
    #[arg(long)]
    pub car: Option<usize>,
    /// Pedestrian tracks.
    #[arg(long)]
    pub pedestrian: Option<usize>,
    /// Two-wheeler tracks.
    #[arg(long)]
    pub two_wheeler: Option<usize>,
    /// Overridable-object tracks.
    #[arg(long)]
    pub overridable: Option<usize>,
    /// Frames per track.
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw dataset directory (default: <out>/<paths.raw_dir>).
    #[arg(long)]
    pub raw: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// ROI dataset file (default: <out>/<paths.roi_file>).
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// manual | reflection-only | spectrum[:GENOME] | hybrid[:GENOME], where
    /// GENOME is `reference`, `seed` or a genome JSON file.
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub data: DataArgs,
    /// Independently initialised training runs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: Option<u64>,
    /// Training epochs per run.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
}

#[derive(Debug, Args)]
pub struct NasArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Total individuals created, memo hits included.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Size of the aging population.
    #[arg(long)]
    pub population: Option<usize>,
    /// Tournament size for parent selection.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Training epochs per candidate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    /// Accuracy the picked candidate must reach; by default derived from
    /// the manual CNN trained under the same budget.
    #[arg(long)]
    pub min_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One or two checkpoint sets: a checkpoint stem or a directory of
    /// `run_*.json` checkpoints.
    #[arg(required = true, num_args = 1..=2)]
    pub checkpoints: Vec<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
}
