//! Explicit midpoint Runge–Kutta time stepping and moment diagnostics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::kinetics::{rhs_total, ConcentrationState, KernelSet};
use crate::parallel::ExecutionPlan;

/// Relative negativity threshold: `min(n) < -NEGATIVITY_TOLERANCE * max(n)` is flagged.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Anything that maps concentrations to `dn/dt`.
pub trait RightHandSide {
    fn eval(&self, n: &[f64]) -> Result<Vec<f64>>;
}

impl<F> RightHandSide for F
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn eval(&self, n: &[f64]) -> Result<Vec<f64>> {
        self(n)
    }
}

/// The aggregation right-hand side `Σ_d S^(d)` on a worker plan.
#[derive(Debug, Clone, Copy)]
pub struct KernelRhs<'a> {
    pub kernels: &'a KernelSet,
    pub plan: &'a ExecutionPlan,
}

impl<'a> KernelRhs<'a> {
    pub fn new(kernels: &'a KernelSet, plan: &'a ExecutionPlan) -> Self {
        KernelRhs { kernels, plan }
    }
}

impl RightHandSide for KernelRhs<'_> {
    fn eval(&self, n: &[f64]) -> Result<Vec<f64>> {
        Ok(rhs_total(self.kernels, n, self.plan, false)?.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        let grid = TimeGrid { t0, dt, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("number of steps must be at least 1"));
        }
        if !self.t0.is_finite() {
            return Err(Error::invalid("initial time must be finite"));
        }
        Ok(())
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.dt * self.steps as f64
    }
}

/// One midpoint step: `k1 = S[n]`, `k2 = S[n + dt/2 k1]`, `n' = n + dt k2`.
pub fn rk2_step(state: &ConcentrationState, dt: f64, rhs: &impl RightHandSide) -> Result<ConcentrationState> {
    rk2_step_indexed(state, dt, rhs, 0)
}

fn rk2_step_indexed(state: &ConcentrationState, dt: f64, rhs: &impl RightHandSide, step: usize) -> Result<ConcentrationState> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let n = state.values();
    let finite = |v: Vec<f64>| {
        if v.len() != n.len() {
            return Err(Error::DimensionMismatch {
                expected: n.len(),
                actual: v.len(),
            });
        }
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(Error::NonFinite { step })
        }
    };
    let k1 = finite(rhs.eval(n)?)?;
    let half = 0.5 * dt;
    let mid: Vec<f64> = n.iter().zip(&k1).map(|(x, k)| x + half * k).collect();
    let k2 = finite(rhs.eval(&mid)?)?;
    let next: Vec<f64> = n.iter().zip(&k2).map(|(x, k)| x + dt * k).collect();
    ConcentrationState::new(next, state.time() + dt).map_err(|_| Error::NonFinite { step })
}

/// `M_m = Σ_k k^m n_k` for each requested order `m >= 0`.
pub fn moments(n: &[f64], orders: &[f64]) -> Result<Vec<f64>> {
    orders
        .iter()
        .map(|&m| {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::invalid(format!("moment order must be non-negative, got {m}")));
            }
            let integer = m.fract() == 0.0 && m <= i32::MAX as f64;
            Ok(n.iter()
                .enumerate()
                .map(|(i, v)| {
                    let k = (i + 1) as f64;
                    let w = if integer { k.powi(m as i32) } else { k.powf(m) };
                    w * v
                })
                .sum())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub step: usize,
    pub t: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub min_n: f64,
    /// `(M1 - M1(0)) / M1(0)`.
    pub mass_drift: f64,
    /// `min(n) < -1e-9 max(n)`.
    pub negative: bool,
}

impl MomentRecord {
    pub fn of(state: &ConcentrationState, step: usize, initial_mass: f64) -> Self {
        let n = state.values();
        let m = moments(n, &[0.0, 1.0, 2.0]).expect("fixed orders are valid");
        let min_n = n.iter().copied().fold(f64::INFINITY, f64::min);
        let max_n = n.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mass_drift = if initial_mass != 0.0 {
            (m[1] - initial_mass) / initial_mass
        } else {
            m[1]
        };
        MomentRecord {
            step,
            t: state.time(),
            m0: m[0],
            m1: m[1],
            m2: m[2],
            min_n,
            mass_drift,
            negative: min_n < -NEGATIVITY_TOLERANCE * max_n.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub records: Vec<MomentRecord>,
    pub warnings: Vec<String>,
}

impl MomentSeries {
    fn push(&mut self, record: MomentRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.t < record.t));
        if record.negative {
            self.warnings.push(format!(
                "step {}: min(n) = {:e} is below the negativity threshold; consider a smaller dt",
                record.step, record.min_n
            ));
        }
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&MomentRecord> {
        self.records.last()
    }

    pub fn any_negative(&self) -> bool {
        self.records.iter().any(|r| r.negative)
    }
}

#[derive(Debug, Error)]
#[error("integration failed at step {step}: {source}")]
pub struct IntegrationFailure {
    pub step: usize,
    #[source]
    pub source: Error,
    /// Records collected before the failure.
    pub series: MomentSeries,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: ConcentrationState,
    pub series: MomentSeries,
}

/// Steps `grid.steps` times from `initial`, recording moments at step 0 and
/// every `record_every` steps. `observer` sees each recorded state.
pub fn run(
    initial: ConcentrationState,
    grid: &TimeGrid,
    record_every: usize,
    rhs: &impl RightHandSide,
    mut observer: impl FnMut(usize, &ConcentrationState) -> Result<()>,
) -> Result<Trajectory, IntegrationFailure> {
    let fail = |step, source, series| IntegrationFailure { step, source, series };
    let mut series = MomentSeries::default();
    if let Err(e) = grid.validate() {
        return Err(fail(0, e, series));
    }
    if record_every == 0 {
        return Err(fail(0, Error::invalid("record_every must be at least 1"), series));
    }
    let initial_mass = moments(initial.values(), &[1.0]).expect("order 1")[0];
    let mut state = ConcentrationState::new(initial.into_values(), grid.t0).map_err(|e| fail(0, e, MomentSeries::default()))?;
    series.push(MomentRecord::of(&state, 0, initial_mass));
    if let Err(e) = observer(0, &state) {
        return Err(fail(0, e, series));
    }
    for step in 1..=grid.steps {
        state = match rk2_step_indexed(&state, grid.dt, rhs, step) {
            Ok(next) => next,
            Err(e) => return Err(fail(step, e, series)),
        };
        // keep t exact on the grid rather than accumulating dt
        state = ConcentrationState::new(state.into_values(), grid.t0 + grid.dt * step as f64)
            .map_err(|e| fail(step, e, series.clone()))?;
        if step % record_every == 0 {
            series.push(MomentRecord::of(&state, step, initial_mass));
            if let Err(e) = observer(step, &state) {
                return Err(fail(step, e, series));
            }
        }
    }
    Ok(Trajectory {
        final_state: state,
        series,
    })
}

/// Builds kernels, plan and initial state from `config` and integrates.
pub fn integrate(config: &SimulationConfig) -> Result<Trajectory, IntegrationFailure> {
    integrate_with(config, |_, _| Ok(()))
}

pub fn integrate_with(
    config: &SimulationConfig,
    observer: impl FnMut(usize, &ConcentrationState) -> Result<()>,
) -> Result<Trajectory, IntegrationFailure> {
    let setup = || -> Result<_> {
        config.validate()?;
        Ok((config.build_kernels()?, config.execution_plan()?, config.initial_state()?))
    };
    let (kernels, plan, initial) = setup().map_err(|source| IntegrationFailure {
        step: 0,
        source,
        series: MomentSeries::default(),
    })?;
    run(initial, &config.time, config.record_every, &KernelRhs::new(&kernels, &plan), observer)
}
