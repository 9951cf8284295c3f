use std::path::{Path, PathBuf};

use multikin_core::{
    dense_from_spec, integrate_with, run_scaling_benchmark, symmetry_violation, DenseKernel, Error, ExecutionPlan,
    Kernel, ScalingConfig, SimulationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::output::{moments_csv, snapshot_csv, snapshot_path, RunManifest};

/// Largest relative error a fast path may show against the dense oracle.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

const DEFAULT_OUTPUT: &str = "output";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => CliError::Io(e.to_string()),
            Error::NonFinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Loads a config file or a run manifest (which embeds the config it ran).
pub fn load_config(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let config = match value.get("manifest_version") {
        Some(_) => serde_json::from_value::<RunManifestConfig>(value).map(|m| m.config),
        None => serde_json::from_value::<SimulationConfig>(value),
    }
    .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut config = config;
    let base = path.parent().unwrap_or(Path::new("."));
    for k in &mut config.kernels {
        k.resolve_paths(base);
    }
    Ok(config)
}

#[derive(serde::Deserialize)]
struct RunManifestConfig {
    config: SimulationConfig,
}

fn apply_workers(config: &mut SimulationConfig, workers: &[usize]) -> Result<(), CliError> {
    match workers {
        [] => Ok(()),
        [w] => {
            config.execution.workers = *w;
            Ok(())
        }
        _ => Err(CliError::Validation("this command takes a single worker count".into())),
    }
}

fn output_dir(config: &SimulationConfig, output: Option<&Path>) -> PathBuf {
    output
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs the integration and writes `moments.csv`, `n_{step}.csv` snapshots and `manifest.json`.
pub fn simulate(config_path: &Path, output: Option<&Path>, workers: &[usize]) -> Result<PathBuf, CliError> {
    let mut config = load_config(config_path)?;
    apply_workers(&mut config, workers)?;
    let warnings = config.validate()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let dir = output_dir(&config, output);
    ensure_dir(&dir)?;

    if config.verify_oracle {
        let reports = verify_config(&config, &VerifyOptions::default())?;
        print_reports(&reports);
        if reports.iter().any(|r| !r.passed()) {
            return Err(CliError::Numerical("oracle verification failed; simulation not started".into()));
        }
    }

    RunManifest::new("simulate", &config, warnings)
        .write(&dir.join("manifest.json"))
        .map_err(|e| CliError::io(&dir.join("manifest.json"), e))?;

    let result = integrate_with(&config, |step, state| {
        let path = snapshot_path(&dir, step);
        snapshot_csv(&path, state).map_err(|source| Error::Io { path, source })
    });
    let moments_path = dir.join("moments.csv");
    let series = match &result {
        Ok(traj) => &traj.series,
        Err(failure) => &failure.series,
    };
    moments_csv(&moments_path, series).map_err(|e| CliError::io(&moments_path, e))?;
    for w in &series.warnings {
        eprintln!("warning: {w}");
    }
    match result {
        Ok(_) => Ok(dir),
        Err(failure) => Err(match failure.source {
            Error::NonFinite { .. } => CliError::Numerical(failure.to_string()),
            other => CliError::from(other),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub states: usize,
    pub symmetry_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            states: 10,
            symmetry_samples: 1000,
        }
    }
}

/// Fast-path error against the dense oracle for one kernel representation.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub order: usize,
    pub path: &'static str,
    pub gain_error: f64,
    pub loss_error: f64,
    pub symmetry: f64,
}

impl PathReport {
    pub fn passed(&self) -> bool {
        self.gain_error <= VERIFY_TOLERANCE && self.loss_error <= VERIFY_TOLERANCE
    }
}

fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Compares each candidate against `oracle` on every state (infinity norm relative to the oracle).
pub fn compare_paths(
    oracle: &DenseKernel,
    candidates: &[Kernel],
    plan: &ExecutionPlan,
    states: &[Vec<f64>],
    options: &VerifyOptions,
) -> Result<Vec<PathReport>, CliError> {
    let oracle_kernel = Kernel::Dense(oracle.clone());
    candidates
        .iter()
        .map(|candidate| {
            let mut report = PathReport {
                order: candidate.order(),
                path: candidate.name(),
                gain_error: 0.0,
                loss_error: 0.0,
                symmetry: symmetry_violation(candidate, options.symmetry_samples, options.seed),
            };
            for n in states {
                let p = oracle_kernel.gain(n, plan)?;
                let q = oracle_kernel.loss(n, plan)?;
                report.gain_error = report.gain_error.max(rel_inf(&candidate.gain(n, plan)?, &p));
                report.loss_error = report.loss_error.max(rel_inf(&candidate.loss(n, plan)?, &q));
            }
            if !report.gain_error.is_finite() || !report.loss_error.is_finite() {
                report.gain_error = f64::INFINITY;
            }
            Ok(report)
        })
        .collect()
}

pub fn random_states(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).collect()
}

pub fn verify_config(config: &SimulationConfig, options: &VerifyOptions) -> Result<Vec<PathReport>, CliError> {
    config.validate()?;
    let plan = config.execution_plan()?;
    let states = random_states(config.n, options.states, options.seed);
    let mut reports = Vec::new();
    for spec in &config.kernels {
        let oracle = dense_from_spec(spec, config.n, config.budget()).map_err(|e| match e {
            Error::BudgetExceeded { .. } => CliError::Validation(format!(
                "order-{} oracle: {e}; reduce N so that N^{} fits the dense budget",
                spec.order(),
                spec.order()
            )),
            other => other.into(),
        })?;
        let mut candidates = Vec::new();
        if let Some(tt) = spec.to_tt(config.n)? {
            candidates.push(Kernel::Tt(tt));
        }
        if let Some(cp) = spec.to_cp(config.n)? {
            candidates.push(Kernel::Cp(cp));
        }
        if candidates.is_empty() {
            let symmetry = symmetry_violation(&Kernel::Dense(oracle.clone()), options.symmetry_samples, options.seed);
            eprintln!(
                "note: order-{} kernel has no low-rank form; only symmetry checked ({symmetry:.2e})",
                spec.order()
            );
        }
        reports.extend(compare_paths(&oracle, &candidates, &plan, &states, options)?);
    }
    Ok(reports)
}

pub fn print_reports(reports: &[PathReport]) {
    println!("{:>5}  {:>5}  {:>12}  {:>12}  {:>12}  {:>6}", "order", "path", "gain err", "loss err", "asymmetry", "result");
    for r in reports {
        println!(
            "{:>5}  {:>5}  {:>12.3e}  {:>12.3e}  {:>12.3e}  {:>6}",
            r.order,
            r.path,
            r.gain_error,
            r.loss_error,
            r.symmetry,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
}

/// Oracle gate: succeeds iff every fast path is within [`VERIFY_TOLERANCE`].
pub fn verify(config_path: &Path, seed: u64, workers: &[usize]) -> Result<Vec<PathReport>, CliError> {
    let mut config = load_config(config_path)?;
    apply_workers(&mut config, workers)?;
    let options = VerifyOptions {
        seed,
        ..VerifyOptions::default()
    };
    let reports = verify_config(&config, &options)?;
    print_reports(&reports);
    if reports.iter().any(|r| !r.passed()) {
        return Err(CliError::Numerical(format!(
            "fast path exceeds relative error {VERIFY_TOLERANCE:e} against the dense oracle"
        )));
    }
    Ok(reports)
}

/// Strong-scaling run; writes `bench_report.json` and prints the table.
pub fn bench(config_path: &Path, output: Option<&Path>, workers: &[usize]) -> Result<PathBuf, CliError> {
    let config = load_config(config_path)?;
    config.validate()?;
    let workers = if workers.is_empty() { vec![1, 2, 4] } else { workers.to_vec() };
    let report = run_scaling_benchmark(&ScalingConfig::from_simulation(&config), &workers)?;
    let dir = output_dir(&config, output);
    ensure_dir(&dir)?;
    let path = dir.join("bench_report.json");
    std::fs::write(&path, report.to_json() + "\n").map_err(|e| CliError::io(&path, e))?;
    print!("{}", report.table());
    println!("max relative deviation from 1 worker: {:.2e}", report.max_relative_deviation);
    Ok(path)
}
