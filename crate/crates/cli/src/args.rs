use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "memclust", version, about = "Competitive-learning clustering on a simulated memristor crossbar")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the clustering network and write cost.csv, centroid PGMs and report.json.
    Cluster(ClusterArgs),
    /// Run the k-means reference and write baseline.json.
    Baseline(BaselineArgs),
    /// Train ideal and circuit engines side by side and write compare.json.
    CompareEngines(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Ideal,
    Circuit,
}

/// Where the inputs come from and how they are preprocessed.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// IDX image file (MNIST layout).
    #[arg(long, value_name = "IDX")]
    pub input: Option<PathBuf>,
    /// Synthetic clusters instead of a file: K,PER_CLUSTER,DIM,FLIP_PROB.
    #[arg(long, value_name = "K,PER,DIM,FLIP", conflicts_with = "input")]
    pub synthetic: Option<String>,
    /// Center-crop every image to WxH, e.g. 20x20.
    #[arg(long, value_name = "WxH")]
    pub crop: Option<String>,
    /// Keep only the first N images.
    #[arg(long, value_name = "N")]
    pub take: Option<usize>,
    /// With --take, draw the images at random (seeded) instead of taking the first N.
    #[arg(long)]
    pub sample: bool,
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CircuitArgs {
    /// Pulse steps across the device conductance range.
    #[arg(long, value_name = "P")]
    pub levels: Option<u32>,
    /// Additive output noise on every crossbar read, volts.
    #[arg(long, value_name = "V")]
    pub noise_std: Option<f64>,
    /// Relative noise on every conductance step.
    #[arg(long, value_name = "S")]
    pub pulse_noise_std: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[arg(long, value_name = "M")]
    pub clusters: Option<usize>,
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,
    #[arg(long, value_name = "A")]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineKind>,
    /// Shuffle the presentation order every epoch.
    #[arg(long)]
    pub shuffle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    /// Separate IDX input for the circuit engine; must have the same dimension.
    #[arg(long, value_name = "IDX")]
    pub circuit_input: Option<PathBuf>,
    #[arg(long, value_name = "M")]
    pub clusters: Option<usize>,
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,
    /// Target learning rate; the circuit rounds it to whole pulses and the ideal
    /// engine uses the rounded value.
    #[arg(long, value_name = "A")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub shuffle: bool,
}
