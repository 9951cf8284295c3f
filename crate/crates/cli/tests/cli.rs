use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multikin_cli::{compare_paths, random_states, VerifyOptions};
use multikin_core::{build_brownian_tt, dense_from_spec, BrownianSpec, ExecutionPlan, Kernel, KernelSpec};
use serde_json::json;

fn multikin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multikin")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, doc: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn config(n: usize, d: usize, kernels: serde_json::Value, dt: f64, steps: usize, record_every: usize) -> serde_json::Value {
    json!({
        "N": n, "D": d,
        "kernels": kernels,
        "initial": {"kind": "monodisperse", "c0": 1.0},
        "time": {"dt": dt, "steps": steps},
        "record_every": record_every
    })
}

fn moments(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,M0,M1,M2,min_n"));
    lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn simulate(config: &Path, out: &Path) -> Output {
    multikin(&["simulate", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()])
}

#[test]
fn zero_kernel_keeps_moments_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.json", config(64, 3, json!([{"type": "constant", "D": 3, "c": 0.0}]), 0.1, 20, 5));
    let out = tmp.path().join("out");
    let run = simulate(&cfg, &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = moments(&out.join("moments.csv"));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(&r[1..], &rows[0][1..]);
    }
    for step in [0, 5, 10, 15, 20] {
        assert!(out.join(format!("n_{step}.csv")).exists(), "missing snapshot {step}");
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn ternary_constant_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ternary.json",
        config(256, 3, json!([{"type": "constant", "D": 3, "c": 1.0}]), 1e-2, 100, 10),
    );
    let out = tmp.path().join("out");
    let run = simulate(&cfg, &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = moments(&out.join("moments.csv"));
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    let exact = (1.0f64 + 2.0 / 3.0).powf(-0.5);
    assert!((last[1] - exact).abs() / exact <= 1e-3, "M0 = {}, exact {exact}", last[1]);
}

#[test]
fn row_count_follows_record_interval() {
    let tmp = tempfile::tempdir().unwrap();
    for (steps, every) in [(10, 3), (12, 4), (7, 7), (5, 10)] {
        let cfg = write_config(
            tmp.path(),
            "rows.json",
            config(32, 2, json!([{"type": "brownian", "D": 2, "mu": [0.5, -0.5]}]), 1e-3, steps, every),
        );
        let out = tmp.path().join(format!("rows_{steps}_{every}"));
        assert!(simulate(&cfg, &out).status.success());
        assert_eq!(moments(&out.join("moments.csv")).len(), 1 + steps / every);
    }
}

#[test]
fn missing_config_names_the_path() {
    let run = multikin(&["simulate", "--config", "/nonexistent/multikin.json"]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("/nonexistent/multikin.json"));
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", config(32, 2, json!([{"type": "constant", "D": 3, "c": 1.0}]), 1e-3, 2, 1));
    let run = simulate(&cfg, &tmp.path().join("out"));
    assert_eq!(run.status.code(), Some(1));
    let cfg = write_config(tmp.path(), "empty.json", config(32, 2, json!([]), 1e-3, 2, 1));
    let run = simulate(&cfg, &tmp.path().join("out"));
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("no collision orders configured"));
}

#[test]
fn manifest_reproduces_moments_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "repro.json",
        config(128, 3, json!([{"type": "brownian", "D": 3, "mu": [0.3, -0.3, 0.0]}]), 1e-3, 20, 4),
    );
    let first = tmp.path().join("first");
    assert!(simulate(&cfg, &first).status.success());
    let second = tmp.path().join("second");
    assert!(simulate(&first.join("manifest.json"), &second).status.success());
    let a = std::fs::read(first.join("moments.csv")).unwrap();
    let b = std::fs::read(second.join("moments.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_passes_for_brownian_kernels() {
    let tmp = tempfile::tempdir().unwrap();
    for (n, d, mu) in [(16, 3, json!([0.4, -0.4, 0.1])), (32, 2, json!([0.5, -0.5]))] {
        let cfg = write_config(
            tmp.path(),
            "verify.json",
            config(n, d, json!([{"type": "brownian", "D": d, "mu": mu}]), 1e-3, 1, 1),
        );
        let run = multikin(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        assert!(String::from_utf8_lossy(&run.stdout).contains("ok"));
    }
}

#[test]
fn verify_rejects_oversized_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "huge.json",
        config(1 << 12, 3, json!([{"type": "constant", "D": 3, "c": 1.0}]), 1e-3, 1, 1),
    );
    let run = multikin(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("reduce N"));
}

#[test]
fn corrupted_core_fails_verification() {
    let n = 16;
    let spec = BrownianSpec::new(vec![0.4, -0.4, 0.1]).unwrap();
    let oracle = dense_from_spec(&KernelSpec::Brownian { dim: 3, mu: spec.clone() }, n, 1 << 20).unwrap();
    let good = build_brownian_tt(&spec, n).unwrap();
    let mut bad = good.clone();
    let v = bad.cores()[1].get(0, 5, 1);
    bad.cores_mut()[1].set(0, 5, 1, v * 1.01 + 0.1);
    let states = random_states(n, 5, 3);
    let reports = compare_paths(
        &oracle,
        &[Kernel::Tt(good), Kernel::Tt(bad)],
        &ExecutionPlan::serial(),
        &states,
        &VerifyOptions::default(),
    )
    .unwrap();
    assert!(reports[0].passed());
    assert!(!reports[1].passed());
}

#[test]
fn bench_reports_speedup_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bench.json",
        config(256, 3, json!([{"type": "brownian", "D": 3, "mu": [0.3, -0.3, 0.0]}]), 1e-3, 2, 1),
    );
    let out = tmp.path().join("single");
    let run = multikin(&["bench", "--config", cfg.to_str().unwrap(), "--workers", "1", "--output", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("1.00"));

    let out = tmp.path().join("three");
    let run = multikin(&["bench", "--config", cfg.to_str().unwrap(), "--workers", "1,2,4", "--output", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bench_report.json")).unwrap()).unwrap();
    assert_eq!(report["worker_counts"], json!([1, 2, 4]));
    assert_eq!(report["speedups"].as_array().unwrap().len(), 3);
    assert_eq!(report["speedups"][0], json!(1.0));
}
