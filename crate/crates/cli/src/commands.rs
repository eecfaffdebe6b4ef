use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use memclust::baseline::{self, KMeansConfig};
use memclust::clustering::{init_weights, Engine, TrainConfig};
use memclust::export;
use serde::Serialize;

use crate::args::{BaselineArgs, ClusterArgs, CompareArgs, EngineKind};
use crate::config::{resolve_circuit, DataSettings, Dataset, FileConfig};
use crate::report::*;

pub const AGREEMENT_MIN: f64 = 0.99;
pub const COST_RELATIVE_MAX: f64 = 0.02;
pub const STRICT_MIN_LEVELS: f64 = 1024.0;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn summary(data: &Dataset) -> DatasetSummary {
    DatasetSummary {
        images: data.images.len(),
        width: data.images.width(),
        height: data.images.height(),
        dim: data.images.dim(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    export::write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let start = Instant::now();
    let file = FileConfig::load(args.data.config.as_deref())?;
    let data_settings = DataSettings::resolve(&args.data, &file)?;
    let clusters = args.clusters.or(file.clusters).unwrap_or(10);
    let train = TrainConfig {
        alpha: args.alpha.or(file.alpha).unwrap_or(0.005),
        epochs: args.epochs.or(file.epochs).unwrap_or(500),
        seed: data_settings.seed,
        shuffle: args.shuffle || file.shuffle.unwrap_or(false),
    };
    train.validate()?;
    let kind = args.engine.or(file.engine).unwrap_or(EngineKind::Ideal);
    let engine = match kind {
        EngineKind::Ideal => Engine::Ideal,
        EngineKind::Circuit => Engine::Circuit(resolve_circuit(&args.circuit, &file)?.matched_to_alpha(train.alpha)),
    };
    let effective_alpha = match &engine {
        Engine::Ideal => train.alpha,
        Engine::Circuit(c) => c.effective_alpha(),
    };
    let out = data_settings.out_dir()?.to_path_buf();

    let t = Instant::now();
    let data = data_settings.load()?;
    let load_ms = ms(t);

    let t = Instant::now();
    let mut model = init_weights(&data.inputs, clusters, train.seed, &engine)?;
    let init_ms = ms(t);

    let t = Instant::now();
    let outcome = model.train(&data.inputs, &train)?;
    let train_ms = ms(t);

    export::write_atomic(out.join("cost.csv"), export::cost_csv(&outcome.cost_trace).as_bytes())?;
    let centroids = model.centroids();
    for (i, c) in centroids.iter().enumerate() {
        let pgm = export::centroid_pgm(c, data.images.width(), data.images.height())?;
        export::write_atomic(out.join(format!("centroid_{i}.pgm")), &pgm)?;
    }

    let report = RunReport {
        command: "cluster",
        version: VERSION,
        config: ClusterConfigEcho {
            data: data_settings.clone(),
            dataset: summary(&data),
            clusters,
            epochs: train.epochs,
            alpha: train.alpha,
            shuffle: train.shuffle,
            engine: engine.name().into(),
            circuit: match engine {
                Engine::Circuit(c) => Some(c),
                Engine::Ideal => None,
            },
        },
        seed: train.seed,
        engine: engine.name().into(),
        effective_alpha,
        final_cost: *outcome.cost_trace.last().expect("epochs >= 1"),
        cost_trace: outcome.cost_trace,
        win_counts: outcome.win_counts,
        centroids,
        timings: Timings { load_ms, init_ms, train_ms, total_ms: ms(start) },
    };
    write_json(&out.join("report.json"), &report)?;
    println!(
        "{} engine: {} epochs, final cost {} ({} inputs, M={})",
        report.engine,
        train.epochs,
        report.final_cost,
        data.inputs.len(),
        clusters
    );
    Ok(())
}

pub fn baseline(args: &BaselineArgs) -> Result<()> {
    let start = Instant::now();
    let file = FileConfig::load(args.data.config.as_deref())?;
    let data_settings = DataSettings::resolve(&args.data, &file)?;
    let defaults = KMeansConfig::default();
    let config = KMeansConfig {
        k: args.k.or(file.k).or(file.clusters).unwrap_or(defaults.k),
        max_iters: args.max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
        restarts: args.restarts.or(file.restarts).unwrap_or(defaults.restarts),
        seed: data_settings.seed,
        tolerance: args.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
    };
    config.validate()?;
    let out = data_settings.out_dir()?.to_path_buf();

    let t = Instant::now();
    let data = data_settings.load()?;
    let load_ms = ms(t);

    let t = Instant::now();
    let result = baseline::kmeans(&data.inputs, &config)?;
    let train_ms = ms(t);
    let cost_l1 = baseline::cost_l1(&result.centroids, &data.inputs)?;
    let mut cluster_sizes = vec![0; config.k];
    for &a in &result.assignments {
        cluster_sizes[a] += 1;
    }

    let report = BaselineReport {
        command: "baseline",
        version: VERSION,
        config: BaselineConfigEcho {
            data: data_settings.clone(),
            dataset: summary(&data),
            k: config.k,
            restarts: config.restarts,
            max_iters: config.max_iters,
            tolerance: config.tolerance,
        },
        seed: config.seed,
        cost_l1,
        inertia: result.inertia,
        iterations: result.iterations,
        best_restart: result.restart,
        cluster_sizes,
        centroids: result.centroids,
        timings: Timings { load_ms, init_ms: 0.0, train_ms, total_ms: ms(start) },
    };
    write_json(&out.join("baseline.json"), &report)?;
    println!("k-means: k={} cost_l1 {} inertia {}", config.k, cost_l1, report.inertia);
    Ok(())
}

pub fn compare_engines(args: &CompareArgs) -> Result<()> {
    let start = Instant::now();
    let file = FileConfig::load(args.data.config.as_deref())?;
    let data_settings = DataSettings::resolve(&args.data, &file)?;
    let clusters = args.clusters.or(file.clusters).unwrap_or(4);
    let requested_alpha = args.alpha.or(file.alpha).unwrap_or(0.005);
    let circuit_input = args.circuit_input.clone().or_else(|| file.circuit_input.clone());
    let mut circuit_args = args.circuit.clone();
    circuit_args.levels = circuit_args.levels.or(file.levels).or(Some(1024));
    let circuit = resolve_circuit(&circuit_args, &file)?.matched_to_alpha(requested_alpha);
    let train = TrainConfig {
        alpha: circuit.effective_alpha(),
        epochs: args.epochs.or(file.epochs).unwrap_or(20),
        seed: data_settings.seed,
        shuffle: args.shuffle || file.shuffle.unwrap_or(false),
    };
    train.validate()?;
    let out = data_settings.out_dir()?.to_path_buf();

    let t = Instant::now();
    let data = data_settings.load()?;
    let circuit_data = match &circuit_input {
        Some(path) => Some(data_settings.load_from(Some(path))?),
        None => None,
    };
    let circuit_inputs = circuit_data.as_ref().map_or(&data.inputs, |d| &d.inputs);
    let (n_ideal, n_circuit) = (data.inputs[0].len(), circuit_inputs[0].len());
    if n_ideal != n_circuit {
        bail!("engines disagree on input dimension: ideal N={n_ideal}, circuit N={n_circuit}");
    }
    if circuit_inputs.len() != data.inputs.len() {
        bail!(
            "engines disagree on input count: ideal m={}, circuit m={}",
            data.inputs.len(),
            circuit_inputs.len()
        );
    }
    let load_ms = ms(t);

    let t = Instant::now();
    let mut ideal = init_weights(&data.inputs, clusters, train.seed, &Engine::Ideal)?;
    let mut hw = init_weights(circuit_inputs, clusters, train.seed, &Engine::Circuit(circuit))?;
    let init_ms = ms(t);

    let t = Instant::now();
    let mut ideal_winners = Vec::new();
    let ideal_out = ideal.train_with(&data.inputs, &train, |e| ideal_winners.push(e.winner))?;
    let mut circuit_winners = Vec::new();
    let circuit_out = hw.train_with(circuit_inputs, &train, |e| circuit_winners.push(e.winner))?;
    let train_ms = ms(t);

    let presentations = ideal_winners.len();
    let agreements = ideal_winners.iter().zip(&circuit_winners).filter(|(a, b)| a == b).count();
    let first_divergence = ideal_winners.iter().zip(&circuit_winners).position(|(a, b)| a != b);
    let cost_relative_diff: Vec<f64> = ideal_out
        .cost_trace
        .iter()
        .zip(&circuit_out.cost_trace)
        .map(|(i, c)| relative_diff(*i, *c))
        .collect();
    let max_cost_relative_diff = cost_relative_diff.iter().cloned().fold(0.0, f64::max);
    let agreement_rate = agreements as f64 / presentations as f64;
    let strict = circuit.crossbar.output_noise_std == 0.0
        && circuit.device.pulse_noise_std == 0.0
        && circuit.device.levels() >= STRICT_MIN_LEVELS - 1e-9;
    let pass = strict.then(|| agreement_rate >= AGREEMENT_MIN && max_cost_relative_diff <= COST_RELATIVE_MAX);

    let report = CompareReport {
        command: "compare-engines",
        version: VERSION,
        config: CompareConfigEcho {
            data: data_settings.clone(),
            circuit_input,
            dataset: summary(&data),
            clusters,
            epochs: train.epochs,
            requested_alpha,
            shuffle: train.shuffle,
            circuit,
        },
        seed: train.seed,
        effective_alpha: train.alpha,
        presentations,
        agreements,
        agreement_rate,
        first_divergence,
        cost_ideal: ideal_out.cost_trace,
        cost_circuit: circuit_out.cost_trace,
        cost_relative_diff,
        max_cost_relative_diff,
        strict,
        pass,
        timings: Timings { load_ms, init_ms, train_ms, total_ms: ms(start) },
    };
    write_json(&out.join("compare.json"), &report)?;
    let verdict = match pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "exploratory",
    };
    println!(
        "winner agreement {:.4} ({agreements}/{presentations}), max cost difference {:.4}%: {verdict}",
        agreement_rate,
        100.0 * max_cost_relative_diff
    );
    Ok(())
}

/// `|b - a| / |a|`, zero when both vanish.
pub fn relative_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}
