use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use areamatch::transform::ScoreScope;

/// Aligns two 2D maps of the same environment by matching their free-space areas.
#[derive(Debug, Parser)]
#[command(name = "areamatch", version)]
pub struct Cli {
    /// Maximum worker threads (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a grid map into an area graph.
    Segment(SegmentArgs),
    /// Estimate the rigid transform that maps A onto B.
    Match(MatchArgs),
    /// Score a match result, or repeated matching runs, against ground truth.
    Eval(EvalArgs),
    /// Time segmentation and matching over one or more map pairs.
    Bench(BenchArgs),
    /// Matching correctness over the simplex lattice of feature weights.
    Sweep(SweepArgs),
    /// Generate a synthetic floor-plan pair with a known transform.
    Synth(SynthArgs),
}

/// Binarization of grayscale rasters. Defaults: free ≥ 250, occupied ≤ 50.
#[derive(Debug, Clone, Default, Args)]
pub struct GridFlags {
    /// Gray level at or above which a pixel is free.
    #[arg(long)]
    pub free_threshold: Option<u8>,
    /// Gray level at or below which a pixel is occupied.
    #[arg(long)]
    pub occupied_threshold: Option<u8>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SegFlags {
    /// Narrowest passage width separating two areas, in metres [default: 1.8].
    #[arg(long, value_name = "M")]
    pub width: Option<f64>,
    /// Areas smaller than this are merged into a neighbour, in m² [default: 1.0].
    #[arg(long, value_name = "M2")]
    pub min_area: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    /// Score samples on every mutual pair.
    All,
    /// Score samples only on the best cluster's pairs.
    Cluster,
}

impl From<ScopeArg> for ScoreScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => ScoreScope::AllPairs,
            ScopeArg::Cluster => ScoreScope::BestCluster,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MatchFlags {
    /// Neighbours considered in the mutual k-nearest-neighbour filter [default: 3].
    #[arg(long)]
    pub k: Option<usize>,
    /// Feature weights `wa,wp,wl` summing to 1 [default: 0.1,0.1,0.8].
    #[arg(long, value_name = "WA,WP,WL", allow_hyphen_values = true)]
    pub weights: Option<String>,
    /// Rotation clustering threshold in degrees [default: 3].
    #[arg(long, value_name = "DEG")]
    pub angle_threshold_deg: Option<f64>,
    /// Overlap percentage a pair needs to count as matched [default: 0.7].
    #[arg(long, value_name = "FRACTION")]
    pub overlap_threshold: Option<f64>,
    /// Seed for the hypothesis order; without it the order is by cost.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pairs used to score transform samples [default: all].
    #[arg(long, value_enum)]
    pub score_scope: Option<ScopeArg>,
    /// Skip the least-squares polish on matched passages.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Grayscale map (PGM or PNG).
    pub map: PathBuf,
    /// Metres per cell.
    #[arg(long, value_name = "M")]
    pub resolution: f64,
    /// Area graph output file.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub seg: SegFlags,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Map A: a grayscale raster, or an area graph (`.areagraph` / `.json`).
    pub map_a: PathBuf,
    /// Map B, same formats as A.
    pub map_b: PathBuf,
    /// Metres per cell of map A; required for raster inputs.
    #[arg(long, value_name = "M")]
    pub resolution_a: Option<f64>,
    /// Metres per cell of map B; required for raster inputs.
    #[arg(long, value_name = "M")]
    pub resolution_b: Option<f64>,
    /// Write an overlay of A moved onto B (rasters only).
    #[arg(long, value_name = "PNG")]
    pub render: Option<PathBuf>,
    /// Include phase timings in the output.
    #[arg(long)]
    pub timings: bool,
    /// Also write the result to this file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub seg: SegFlags,
    #[command(flatten)]
    pub params: MatchFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Pair manifest (as written by `synth`).
    pub manifest: PathBuf,
    /// Evaluate this `match` output instead of running the matcher.
    #[arg(long, value_name = "JSON")]
    pub result: Option<PathBuf>,
    /// Seeded matching runs [default: 20].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Rotation tolerance in degrees [default: 3].
    #[arg(long, value_name = "DEG")]
    pub tol_deg: Option<f64>,
    /// Translation tolerance in metres [default: two cells].
    #[arg(long, value_name = "M")]
    pub tol_m: Option<f64>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub seg: SegFlags,
    #[command(flatten)]
    pub params: MatchFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Pair manifests; one table row each.
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
    /// Seeded matching runs per pair [default: 20].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Also write the table as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub seg: SegFlags,
    #[command(flatten)]
    pub params: MatchFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Pair manifests; correctness is the fraction of pairs recovered.
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
    /// Lattice step.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// CSV output file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Minimum overlap percentage for a ground-truth area correspondence.
    #[arg(long, default_value_t = 0.5, value_name = "FRACTION")]
    pub gt_overlap: f64,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub seg: SegFlags,
    #[command(flatten)]
    pub params: MatchFlags,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for `map_a.pgm`, `map_b.pgm` and `pair.json`.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Floor-plan and noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corridor bands, each lined with rooms on both sides.
    #[arg(long, default_value_t = 1)]
    pub bands: usize,
    /// Rooms on each side of a corridor.
    #[arg(long, default_value_t = 6)]
    pub rooms_per_row: usize,
    /// Metres per cell.
    #[arg(long, default_value_t = 0.05, value_name = "M")]
    pub resolution: f64,
    /// Ground-truth rotation in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_deg: f64,
    /// Ground-truth translation x in metres.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub tx: f64,
    /// Ground-truth translation y in metres.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub ty: f64,
    /// Draw the ground truth from the seed instead: any rotation and a
    /// translation up to `--max-translation`.
    #[arg(long)]
    pub random_transform: bool,
    #[arg(long, default_value_t = 5.0, value_name = "M")]
    pub max_translation: f64,
    /// Fraction of occupied cells of A turned free.
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    /// Fraction of free cells of A turned occupied.
    #[arg(long, default_value_t = 0.0)]
    pub speckle: f64,
}
