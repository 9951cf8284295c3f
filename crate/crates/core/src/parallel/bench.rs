//! Strong-scaling harness: fixed problem, varying worker pool size.
//!
//! Protocol per worker count: one warm-up integration (discarded), then
//! `repeats` timed integrations; the median wall time is reported. Speedup
//! is relative to a single worker.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::brownian::BrownianSpec;
use crate::config::{ExecutionSettings, InitialCondition, Representation, SimulationConfig};
use crate::error::{Error, Result};
use crate::integrator::{run, KernelRhs, TimeGrid};
use crate::kernel_spec::KernelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub n: usize,
    pub kernels: Vec<KernelSpec>,
    pub initial: InitialCondition,
    pub dt: f64,
    pub steps: usize,
    pub repeats: usize,
    pub representation: Representation,
    pub execution: ExecutionSettings,
}

impl Default for ScalingConfig {
    /// Pure ternary Brownian aggregation, `N = 2^17`, 100 steps.
    fn default() -> Self {
        ScalingConfig {
            n: 1 << 17,
            kernels: vec![KernelSpec::Brownian {
                dim: 3,
                mu: BrownianSpec::new(vec![1.0 / 3.0, -1.0 / 3.0, 0.0]).expect("three exponents"),
            }],
            initial: InitialCondition::Monodisperse { c0: 1.0 },
            dt: 1e-3,
            steps: 100,
            repeats: 3,
            representation: Representation::Tt,
            execution: ExecutionSettings::default(),
        }
    }
}

impl ScalingConfig {
    pub fn from_simulation(config: &SimulationConfig) -> Self {
        ScalingConfig {
            n: config.n,
            kernels: config.kernels.clone(),
            initial: config.initial.clone(),
            dt: config.time.dt,
            steps: config.time.steps,
            repeats: 3,
            representation: config.representation,
            execution: config.execution,
        }
    }

    fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            n: self.n,
            max_order: self.kernels.iter().map(KernelSpec::order).max().unwrap_or(0),
            kernels: self.kernels.clone(),
            initial: self.initial.clone(),
            time: TimeGrid {
                t0: 0.0,
                dt: self.dt,
                steps: self.steps,
            },
            record_every: self.steps.max(1),
            output_dir: None,
            execution: self.execution,
            representation: self.representation,
            verify_oracle: false,
            dense_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub max_order: usize,
    pub steps: usize,
    pub worker_counts: Vec<usize>,
    pub times_sec: Vec<f64>,
    pub speedups: Vec<f64>,
    /// Single-worker median time that the speedups divide.
    pub baseline_time_sec: f64,
    /// Largest relative infinity-norm difference of the final state from the single-worker run.
    pub max_relative_deviation: f64,
}

impl ScalingReport {
    /// Plain-text table: workers, median time, speedup.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>8}  {:>12}  {:>8}", "workers", "time, sec", "speedup");
        for ((p, t), s) in self.worker_counts.iter().zip(&self.times_sec).zip(&self.speedups) {
            let _ = writeln!(out, "{p:>8}  {t:>12.4}  {s:>8.2}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn relative_deviation(a: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(reference).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// One `(median seconds, final state)` measurement at `workers`.
fn measure(config: &ScalingConfig, workers: usize) -> Result<(f64, Vec<f64>)> {
    let sim = config.simulation();
    sim.validate()?;
    let kernels = sim.build_kernels()?;
    let plan = config.execution.plan_with_workers(workers)?;
    plan.partition(config.n)?;
    let rhs = KernelRhs::new(&kernels, &plan);
    let once = || -> Result<Vec<f64>> {
        let traj = run(sim.initial_state()?, &sim.time, sim.record_every, &rhs, |_, _| Ok(())).map_err(|f| f.source)?;
        Ok(traj.final_state.into_values())
    };
    let mut last = once()?;
    let mut times = Vec::with_capacity(config.repeats);
    for _ in 0..config.repeats.max(1) {
        let start = Instant::now();
        last = once()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(times), last))
}

pub fn run_scaling_benchmark(config: &ScalingConfig, worker_counts: &[usize]) -> Result<ScalingReport> {
    if worker_counts.is_empty() {
        return Err(Error::invalid("worker list is empty"));
    }
    let (baseline, reference) = measure(config, 1)?;
    let mut times = Vec::with_capacity(worker_counts.len());
    let mut deviation: f64 = 0.0;
    for &p in worker_counts {
        if p == 1 {
            times.push(baseline);
            continue;
        }
        let (t, state) = measure(config, p)?;
        deviation = deviation.max(relative_deviation(&state, &reference));
        times.push(t);
    }
    let speedups = worker_counts
        .iter()
        .zip(&times)
        .map(|(&p, &t)| if p == 1 { 1.0 } else { baseline / t })
        .collect();
    Ok(ScalingReport {
        n: config.n,
        max_order: config.kernels.iter().map(KernelSpec::order).max().unwrap_or(0),
        steps: config.steps,
        worker_counts: worker_counts.to_vec(),
        times_sec: times,
        speedups,
        baseline_time_sec: baseline,
        max_relative_deviation: deviation,
    })
}
