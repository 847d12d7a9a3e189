use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use simcheck_core::DimensionMask;

#[derive(Debug, Parser)]
#[command(
    name = "simcheck",
    version,
    about = "Verify segmentation similarity maps before mask decoding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one map and decide whether the queried target is present.
    Verify(VerifyArgs),
    /// Select thresholds from a labelled manifest by grid search.
    Calibrate(CalibrateArgs),
    /// Generate a synthetic labelled corpus.
    GenCorpus(GenCorpusArgs),
    /// Measure accuracy over a labelled manifest.
    Evaluate(EvaluateArgs),
    /// Serve POST /verify and GET /healthz.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    /// Scoring config JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `s,c,p` thresholds, or a JSON file holding thresholds or a calibration result.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Dimensions used by the decision, e.g. `SCP` or `SC`.
    #[arg(long, default_value = "SCP")]
    pub mask: DimensionMask,
}

#[derive(Debug, Clone, Args)]
pub struct AssessorArgs {
    /// Consult the holistic assessor for the final decision.
    #[arg(long)]
    pub with_assessor: bool,
    /// Assessor config JSON (endpoint, model, key variable, timeout, retries).
    #[arg(long)]
    pub assessor_config: Option<PathBuf>,
    /// Replay scripted assessor replies from a transcript instead of calling the endpoint.
    #[arg(long)]
    pub assessor_transcript: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Map file (`.json` grid or `.csv`).
    pub map: PathBuf,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub assessor: AssessorArgs,
    /// Write the rendered heatmap PNG here.
    #[arg(long)]
    pub emit_heatmap: Option<PathBuf>,
    #[arg(long, default_value = "turbo")]
    pub colormap: String,
    #[arg(long, default_value_t = simcheck_core::render::DEFAULT_SCALE)]
    pub scale: u32,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Only use manifest entries of this split.
    #[arg(long)]
    pub split: Option<String>,
    /// Points per dimension of a uniform [0, 1] grid.
    #[arg(long, default_value_t = 41, conflicts_with = "grid")]
    pub grid_points: usize,
    /// JSON grid `{"strength": [...], "compactness": [...], "purity": [...]}`.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Output directory for `calibration.json` and `scatter.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    /// Named layout: `default` or `paper-scale`.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub preset: Option<String>,
    /// JSON list of synthetic specs (each may carry a `split`).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Base seed for presets.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub assessor: AssessorArgs,
    #[arg(long)]
    pub split: Option<String>,
    /// Emit one quantitative row per non-empty dimension mask.
    #[arg(long)]
    pub all_masks: bool,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub assessor: AssessorArgs,
}
