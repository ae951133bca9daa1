use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "patchpoly",
    version,
    about = "Patch-wise polygon segmentation: fit per-patch polygons plus a gating map to a mask"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic binary mask (PGM)
    Synth(SynthArgs),
    /// Fit a polygon field to a ground-truth mask
    Fit(FitArgs),
    /// Render a saved polygon field, optionally at another resolution
    Render(RenderArgs),
    /// Evaluate a predicted mask against the ground truth
    Eval(EvalArgs),
    /// Fit across a grid of vertex counts and patch sizes
    Sweep(SweepArgs),
    /// Compare analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Shape name: disk, rect, ring, crescent or two_blobs
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    /// Override the primary radius (disk, ring outer, crescent, blobs)
    #[arg(long)]
    pub radius: Option<f64>,
    /// Override the center distance of the two blobs
    #[arg(long)]
    pub separation: Option<f64>,
    /// Output mask path (PGM)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    /// Ground-truth mask (PGM; values above 127 count as foreground)
    #[arg(long)]
    pub gt: PathBuf,
    /// Polygon vertex count
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Patch side in pixels
    #[arg(long, default_value_t = 8)]
    pub patch: usize,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 10.0)]
    pub gamma_start: f64,
    #[arg(long, default_value_t = 40.0)]
    pub gamma_end: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the fitted output mask (soft values) here
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
    /// Write the decoded polygon field here
    #[arg(long)]
    pub out_field: Option<PathBuf>,
    /// Write the per-iteration CSV trace here
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    /// Polygon field file written by `fit`
    #[arg(long)]
    pub field: PathBuf,
    /// Per-patch resolution multiplier
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Skip the gating product and write the raw polygon raster
    #[arg(long)]
    pub no_gate: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    /// Predicted mask (soft values allowed; binarized before scoring)
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// CSV output; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub gt: PathBuf,
    /// Vertex counts to try
    #[arg(long = "k-list", value_delimiter = ',', default_values_t = vec![4, 5, 8, 16, 24])]
    pub k_list: Vec<usize>,
    /// Patch sides to try
    #[arg(long = "s-list", value_delimiter = ',', default_values_t = vec![4, 8, 16, 32])]
    pub s_list: Vec<usize>,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Maximum allowed relative error against central finite differences
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}
