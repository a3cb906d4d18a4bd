use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "twopoint", version, about = "Two-point sEMG finger force decoding pipeline")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort on disk.
    Synth(SynthArgs),
    /// Train per-subject models with cross-validation and a final refit.
    Train(TrainArgs),
    /// Direction classification (AUC, SE, accuracy) on held-out records.
    Eval(EvalArgs),
    /// Interpolation sweeps over scaled held-out records.
    Sweep(SweepArgs),
    /// Sine tracking session through the streaming decoder.
    Track(TrackArgs),
    /// Real-time decode service for the operator console.
    Serve(ServeArgs),
    /// Aggregate eval and sweep outputs into summary tables.
    Report(ReportArgs),
    /// Inspect the preprocessing filters.
    Dsp(DspArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Record length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma list of dc, mains, drift, or "none"/"all".
    #[arg(long)]
    pub artifacts: Option<String>,
    /// Noise floor as a fraction of the largest mixing gain.
    #[arg(long)]
    pub noise_floor: Option<f64>,
    #[arg(long)]
    pub cross_talk: Option<f64>,
    /// Per-subject mixing jitter (fraction).
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Dataset directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Subject index, comma list, or "all".
    #[arg(long)]
    pub subject: Option<String>,
    /// dd, ln, mlp, cnn, a comma list, or "all".
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Subjects trained in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Checkpoint file for one subject and model, else a directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint files or directories of checkpoints.
    #[arg(long, num_args = 1..)]
    pub ckpt: Vec<PathBuf>,
    /// Dataset directory (defaults to the one recorded in the checkpoint).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, num_args = 1..)]
    pub ckpt: Vec<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Scale magnitudes as start:stop:step or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub r2_min: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub freq: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    /// Finger name (little, ring, middle, index, thumb) or label position.
    #[arg(long)]
    pub finger: Option<String>,
    /// Drive the synthetic subject from the target sine.
    #[arg(long)]
    pub scripted: bool,
    /// Scripted movement: "hand" (all fingers) or "finger" (selected only).
    #[arg(long)]
    pub scope: Option<String>,
    /// Dataset whose subject mixing the source uses.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub subject: Option<usize>,
    /// Seed of the source's noise carriers.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    /// Static operator console to serve over HTTP.
    #[arg(long)]
    pub ui: Option<PathBuf>,
    #[arg(long)]
    pub k_alpha: Option<f64>,
    #[arg(long = "k-f")]
    pub k_f: Option<f64>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub subject: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop after this many seconds of stream time.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Start a scripted sine session at this frequency on launch.
    #[arg(long)]
    pub script_freq: Option<f64>,
    #[arg(long)]
    pub script_finger: Option<String>,
    #[arg(long)]
    pub script_duration: Option<f64>,
    /// Run the source unpaced (for benchmarks and tests).
    #[arg(long)]
    pub fast: bool,
    /// Write timing statistics here on exit.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory searched recursively for eval and sweep outputs.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write the tables here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DspArgs {
    /// Print the filter sections as JSON.
    #[arg(long)]
    pub dump_coeffs: bool,
}
