//! JSON artifacts written by the subcommands.
//!
//! Wall-clock figures live under `timings` so that two runs with the same seed can
//! be compared after dropping that one key.

use serde::Serialize;

use memclust::clustering::CircuitConfig;

use crate::config::DataSettings;

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub load_ms: f64,
    pub init_ms: f64,
    pub train_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub images: usize,
    pub width: usize,
    pub height: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterConfigEcho {
    pub data: DataSettings,
    pub dataset: DatasetSummary,
    pub clusters: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub shuffle: bool,
    pub engine: String,
    /// Circuit parameters when the circuit engine is used.
    pub circuit: Option<CircuitConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: ClusterConfigEcho,
    pub seed: u64,
    pub engine: String,
    /// Learning rate actually applied per update (circuit: whole pulses).
    pub effective_alpha: f64,
    pub cost_trace: Vec<f64>,
    pub final_cost: f64,
    pub win_counts: Vec<u64>,
    pub centroids: Vec<Vec<f64>>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineConfigEcho {
    pub data: DataSettings,
    pub dataset: DatasetSummary,
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: BaselineConfigEcho,
    pub seed: u64,
    /// Manhattan cost of the k-means centroids, comparable with `final_cost` of a cluster run.
    pub cost_l1: f64,
    pub inertia: f64,
    pub iterations: usize,
    pub best_restart: usize,
    pub cluster_sizes: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareConfigEcho {
    pub data: DataSettings,
    pub circuit_input: Option<std::path::PathBuf>,
    pub dataset: DatasetSummary,
    pub clusters: usize,
    pub epochs: usize,
    pub requested_alpha: f64,
    pub shuffle: bool,
    pub circuit: CircuitConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: CompareConfigEcho,
    pub seed: u64,
    /// Learning rate shared by both engines.
    pub effective_alpha: f64,
    pub presentations: usize,
    pub agreements: usize,
    pub agreement_rate: f64,
    /// Index of the first presentation where the winners differ.
    pub first_divergence: Option<usize>,
    pub cost_ideal: Vec<f64>,
    pub cost_circuit: Vec<f64>,
    /// `|circuit - ideal| / ideal` per epoch.
    pub cost_relative_diff: Vec<f64>,
    pub max_cost_relative_diff: f64,
    /// Whether the settings qualify for the equivalence check (noise off, >= 1024 levels).
    pub strict: bool,
    /// Check outcome in strict mode; absent in exploratory mode.
    pub pass: Option<bool>,
    pub timings: Timings,
}
