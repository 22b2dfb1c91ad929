use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "headfit", version, about = "Fit, distill and edit per-vertex head offsets from silhouettes")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic head fixture with known offsets.
    Synth,
    /// Fit an offset field to target silhouettes.
    Fit(FitArgs),
    /// Distill offset fields into a linear basis.
    Distill(DistillArgs),
    /// Build a mesh from model parameters and offsets.
    Reconstruct(ReconstructArgs),
    /// Rasterize a soft silhouette of a mesh.
    Render(RenderArgs),
    /// Edit basis coefficients and write the resulting offset field.
    Edit(EditArgs),
    /// Compare meshes, masks, fields and traces.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub mask_full: PathBuf,
    #[arg(long)]
    pub mask_hair: PathBuf,
    #[arg(long)]
    pub camera: PathBuf,
    /// Per-step loss trace (JSON lines).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Metrics of the final fit.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Fitted mesh (OBJ).
    #[arg(long)]
    pub mesh_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    /// Directory of `.bin` offset fields.
    #[arg(long)]
    pub fields: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub k_hair: usize,
    #[arg(long, default_value_t = 10)]
    pub k_neck: usize,
    /// Model directory supplying the region partition.
    #[arg(long, required_unless_present = "regions")]
    pub model: Option<PathBuf>,
    /// Region sidecar JSON, instead of `--model`.
    #[arg(long, conflicts_with = "model")]
    pub regions: Option<PathBuf>,
    /// Skip mean centering (pure pseudo-inverse projection).
    #[arg(long)]
    pub no_center: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Pose parameters; zeros when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Offset field (`.bin`).
    #[arg(long, conflicts_with = "basis")]
    pub field: Option<PathBuf>,
    /// Basis directory, used with `--coeffs`.
    #[arg(long, requires = "coeffs")]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Region sidecar; needed for `--hair-only`.
    #[arg(long)]
    pub regions: Option<PathBuf>,
    #[arg(long)]
    pub camera: PathBuf,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    /// Render only triangles without neck vertices.
    #[arg(long, requires = "regions")]
    pub hair_only: bool,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    #[arg(long)]
    pub basis: PathBuf,
    /// Starting coefficients; zeros when omitted.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// `k=VALUE`, where VALUE is a number or one of min, p10, p25, p75, p90, max.
    #[arg(long = "set", value_name = "K=VALUE", required = true)]
    pub set: Vec<String>,
    /// Edited coefficients (JSON).
    #[arg(long)]
    pub coeffs_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, requires = "reference")]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, requires = "target_mask")]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub target_mask: Option<PathBuf>,
    #[arg(long, requires = "reference_field")]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub reference_field: Option<PathBuf>,
    /// Fit trace (JSON lines).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}
