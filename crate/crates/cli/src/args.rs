use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vimbench_core::metrics::{FrameCost, MetricConfig};

#[derive(Debug, Parser)]
#[command(name = "vimbench", version, about = "Video instance matting benchmark toolkit")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "VIMBENCH_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against ground truth with VIMQ.
    Evaluate(EvaluateArgs),
    /// Synthesise clips from a JSON spec.
    Composite(CompositeArgs),
    /// Check stored clips against the composition equation.
    Validate(ValidateArgs),
    /// Perturb a mask sequence.
    Augment(AugmentArgs),
    /// Split a merged matte sequence into tracked instances.
    Link(LinkArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TqCost {
    L1,
    Iou,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 50.0)]
    pub omega_mse: f64,
    #[arg(long, default_value_t = 50.0)]
    pub omega_mad: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_dtssd: f64,
    #[arg(long, default_value_t = 0.0)]
    pub binarize_threshold: f32,
    /// Frame-level cost for identity-switch detection.
    #[arg(long, value_enum, default_value = "l1")]
    pub tq_cost: TqCost,
}

impl MetricArgs {
    pub fn config(&self) -> MetricConfig {
        MetricConfig {
            rho: self.rho,
            omega_mse: self.omega_mse,
            omega_mad: self.omega_mad,
            omega_dtssd: self.omega_dtssd,
            binarize_threshold: self.binarize_threshold,
            frame_cost: match self.tq_cost {
                TqCost::L1 => FrameCost::L1,
                TqCost::Iou => FrameCost::Iou,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Prediction root: `<clip>/<instance>/NNNNN.png`.
    pub pred_root: PathBuf,
    /// Ground-truth root: `<clip>/manifest.json` plus instance directories.
    pub gt_root: PathBuf,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Pool instances across clips instead of averaging clip scores.
    #[arg(long)]
    pub pool: bool,
    /// Add MAD / MSE / Grad / dtSSD over instance-merged mattes.
    #[arg(long)]
    pub video_matting: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompositeArgs {
    /// JSON spec; relative asset paths resolve against its directory.
    pub spec: PathBuf,
    pub out_root: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// A clip directory or a root holding clip directories.
    pub clip_root: PathBuf,
    #[arg(long, default_value_t = 2.0 / 255.0)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    /// Directory of binary mask frames.
    pub input: PathBuf,
    pub output: PathBuf,
    /// Augmentation config JSON.
    #[arg(long, conflicts_with = "salt_pepper")]
    pub config: Option<PathBuf>,
    /// Only flip this fraction of pixels per frame.
    #[arg(long)]
    pub salt_pepper: Option<f64>,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Directory of merged matte frames.
    pub input: PathBuf,
    /// Output clip directory (one sub-directory per track).
    pub output: PathBuf,
    /// Components below this area are dropped (default scales 100 px at 1080p).
    #[arg(long)]
    pub min_area: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub binarize_threshold: f32,
}
