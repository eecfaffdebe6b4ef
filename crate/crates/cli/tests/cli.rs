use std::path::Path;
use std::process::{Command, Output};

use memclust::data::{self, ImageSet};
use memclust::export;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memclust")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn cluster_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["cluster", "--synthetic", "3,20,16,0.1", "--clusters", "3", "--epochs", "7", "--seed", "5", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(dir.path().join("cost.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epoch,cost"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (e, c) = l.split_once(',').unwrap();
            (e.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), (1..=7).collect::<Vec<_>>());
    assert!(csv.ends_with('\n'));

    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["cost_trace"].as_array().unwrap().len(), 7);
    let wins: u64 = report["win_counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(wins, 7 * 60);
    assert_eq!(report["seed"], 5);
    assert_eq!(report["config"]["clusters"], 3);
    assert_eq!(report["final_cost"].as_f64().unwrap(), rows[6].1);

    let centroids = report["centroids"].as_array().unwrap();
    for (i, c) in centroids.iter().enumerate() {
        let (w, h, px) = export::decode_pgm(&std::fs::read(dir.path().join(format!("centroid_{i}.pgm"))).unwrap()).unwrap();
        assert_eq!((w, h), (16, 1));
        for (p, wv) in px.iter().zip(c.as_array().unwrap()) {
            let back = *p as f64 / 255.0 * 2.0 - 1.0;
            assert!((back - wv.as_f64().unwrap()).abs() <= 1.0 / 255.0 + 1e-12);
        }
    }
}

#[test]
fn noiseless_synthetic_run_reaches_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "cluster", "--synthetic", "4,1,32,0.0", "--clusters", "4", "--epochs", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("report.json"))["final_cost"].as_f64().unwrap(), 0.0);
}

#[test]
fn circuit_engine_runs_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "synthetic = \"2,10,8,0.1\"\nclusters = 2\nepochs = 3\nengine = \"circuit\"\nlevels = 512\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["cluster", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("report.json"));
    assert_eq!(r["engine"], "circuit");
    assert!(r["config"]["circuit"].is_object());
}

#[test]
fn baseline_writes_l1_cost() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "--synthetic", "3,10,12,0.0", "--k", "3", "--seed", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("baseline.json"));
    assert_eq!(r["cost_l1"].as_f64().unwrap(), 0.0);
    assert_eq!(r["cluster_sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum::<u64>(), 30);
}

#[test]
fn compare_engines_exploratory_with_binary_devices() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compare-engines", "--synthetic", "4,13,16,0.2", "--take", "50", "--levels", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("compare.json"));
    assert_eq!(r["strict"], false);
    assert!(r["pass"].is_null());
    assert_eq!(r["presentations"], 1000);
}

#[test]
fn compare_engines_strict_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compare-engines", "--synthetic", "4,13,16,0.2", "--take", "50", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("compare.json"));
    assert_eq!(r["strict"], true);
    assert_eq!(r["pass"], true);
}

#[test]
fn compare_engines_rejects_mismatched_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.idx");
    let b = dir.path().join("b.idx");
    std::fs::write(&a, data::serialize_idx_images(&ImageSet::new(4, 4, vec![0; 3 * 16]).unwrap()).unwrap()).unwrap();
    std::fs::write(&b, data::serialize_idx_images(&ImageSet::new(3, 3, vec![255; 3 * 9]).unwrap()).unwrap()).unwrap();
    let o = run(&[
        "compare-engines", "--input", a.to_str().unwrap(), "--circuit-input", b.to_str().unwrap(), "--clusters", "2",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk");
    std::fs::write(&junk, b"not an idx file").unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["cluster", "--input", junk.to_str().unwrap(), "--out", out.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["cluster", "--bogus-flag"])), 1);
    assert_eq!(code(&run(&["cluster", "--synthetic", "2,5,8,0.1"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn programming_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "engine = \"circuit\"\n[device]\nmax_program_pulses = 2\n").unwrap();
    let o = run(&[
        "cluster", "--config", cfg.to_str().unwrap(), "--synthetic", "2,5,8,0.1", "--clusters", "2", "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}
