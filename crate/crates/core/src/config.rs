//! Simulation configuration document.
//!
//! ```json
//! {
//!   "N": 1024,
//!   "D": 3,
//!   "kernels": [{"type": "constant", "D": 3, "c": 1.0}],
//!   "initial": {"kind": "monodisperse", "c0": 1.0},
//!   "time": {"t0": 0.0, "dt": 0.001, "steps": 1000},
//!   "record_every": 100,
//!   "output_dir": "out",
//!   "execution": {"workers": 1},
//!   "representation": "auto",
//!   "verify_oracle": false
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::TimeGrid;
use crate::kernel_spec::{dense_from_spec, KernelSpec};
use crate::kinetics::{ConcentrationState, KernelSet};
use crate::parallel::{ExecutionPlan, FftLengthPolicy};
use crate::tensor::DEFAULT_DENSE_BUDGET;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Monodisperse {
        #[serde(default = "one")]
        c0: f64,
    },
    #[serde(alias = "vector")]
    UserVector { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn state(&self, n: usize, t0: f64) -> Result<ConcentrationState> {
        match self {
            InitialCondition::Monodisperse { c0 } => {
                if !(*c0 >= 0.0) {
                    return Err(Error::invalid("monodisperse concentration must be non-negative"));
                }
                ConcentrationState::monodisperse(n, *c0, t0)
            }
            InitialCondition::UserVector { values } => {
                if values.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: values.len(),
                    });
                }
                if values.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::invalid("initial concentrations must be non-negative"));
                }
                ConcentrationState::new(values.clone(), t0)
            }
        }
    }
}

/// Which kernel representation the simulation evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// TT where an exact form is known, dense otherwise.
    #[default]
    Auto,
    Tt,
    Cp,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutionSettings {
    pub workers: usize,
    pub fft_length: FftLengthPolicy,
    pub deterministic: bool,
}

impl Default for ExecutionSettings {
    fn default() -> Self {
        ExecutionSettings {
            workers: 1,
            fft_length: FftLengthPolicy::PowerOfTwo,
            deterministic: true,
        }
    }
}

impl ExecutionSettings {
    pub fn plan(&self) -> Result<ExecutionPlan> {
        self.plan_with_workers(self.workers)
    }

    pub fn plan_with_workers(&self, workers: usize) -> Result<ExecutionPlan> {
        let mut plan = ExecutionPlan::new(workers)?;
        plan.fft_length = self.fft_length;
        plan.deterministic = self.deterministic;
        Ok(plan)
    }
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub max_order: usize,
    pub kernels: Vec<KernelSpec>,
    pub initial: InitialCondition,
    pub time: TimeGrid,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub execution: ExecutionSettings,
    #[serde(default)]
    pub representation: Representation,
    #[serde(default)]
    pub verify_oracle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_budget: Option<u64>,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a config file; relative table paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = SimulationConfig::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for k in &mut config.kernels {
            k.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn budget(&self) -> u128 {
        self.dense_budget.map(u128::from).unwrap_or(DEFAULT_DENSE_BUDGET)
    }

    /// Checks the document; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.n < 2 {
            return Err(Error::invalid(format!("N must be at least 2, got {}", self.n)));
        }
        if self.max_order < 2 {
            return Err(Error::invalid(format!("D must be at least 2, got {}", self.max_order)));
        }
        if self.kernels.is_empty() {
            return Err(Error::NoCollisionOrders);
        }
        let mut seen = Vec::new();
        for k in &self.kernels {
            k.validate()?;
            if k.order() > self.max_order {
                return Err(Error::invalid(format!(
                    "kernel of order {} exceeds D = {}",
                    k.order(),
                    self.max_order
                )));
            }
            if seen.contains(&k.order()) {
                return Err(Error::invalid(format!("order {} is configured twice", k.order())));
            }
            seen.push(k.order());
        }
        self.time.validate()?;
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        if self.execution.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if self.n % self.execution.workers != 0 {
            return Err(Error::Partition {
                n: self.n,
                workers: self.execution.workers,
            });
        }
        self.initial.state(self.n, self.time.t0)?;
        if !self.n.is_power_of_two() {
            warnings.push(format!("N = {} is not a power of two", self.n));
        }
        Ok(warnings)
    }

    pub fn initial_state(&self) -> Result<ConcentrationState> {
        self.initial.state(self.n, self.time.t0)
    }

    pub fn execution_plan(&self) -> Result<ExecutionPlan> {
        self.execution.plan()
    }

    pub fn build_kernels(&self) -> Result<KernelSet> {
        let mut set = KernelSet::new();
        for spec in &self.kernels {
            let order = spec.order();
            let unavailable = |what: &str| Error::invalid(format!("no {what} form is known for the order-{order} kernel"));
            match self.representation {
                Representation::Auto => match spec.to_tt(self.n)? {
                    Some(tt) => set.insert(tt)?,
                    None => set.insert(dense_from_spec(spec, self.n, self.budget())?)?,
                },
                Representation::Tt => set.insert(spec.to_tt(self.n)?.ok_or_else(|| unavailable("TT"))?)?,
                Representation::Cp => set.insert(spec.to_cp(self.n)?.ok_or_else(|| unavailable("CP"))?)?,
                Representation::Dense => set.insert(dense_from_spec(spec, self.n, self.budget())?)?,
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "N": 16, "D": 3,
        "kernels": [{"type": "constant", "D": 3, "c": 1.0},
                    {"type": "brownian", "D": 2, "mu": [0.5, -0.5]}],
        "initial": {"kind": "monodisperse", "c0": 1.0},
        "time": {"dt": 0.01, "steps": 10},
        "record_every": 5
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = SimulationConfig::from_json(DOC).unwrap();
        assert_eq!(c.n, 16);
        assert_eq!(c.time.t0, 0.0);
        assert_eq!(c.execution.workers, 1);
        assert_eq!(c.representation, Representation::Auto);
        assert!(c.validate().unwrap().is_empty());
        let set = c.build_kernels().unwrap();
        assert_eq!(set.orders().collect::<Vec<_>>(), vec![2, 3]);
        let back = SimulationConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let mut c = SimulationConfig::from_json(DOC).unwrap();
        c.max_order = 2;
        assert!(c.validate().is_err());

        let mut c = SimulationConfig::from_json(DOC).unwrap();
        c.execution.workers = 3;
        assert!(matches!(c.validate(), Err(Error::Partition { .. })));

        let mut c = SimulationConfig::from_json(DOC).unwrap();
        c.kernels.clear();
        assert!(matches!(c.validate(), Err(Error::NoCollisionOrders)));

        let mut c = SimulationConfig::from_json(DOC).unwrap();
        c.initial = InitialCondition::UserVector { values: vec![1.0; 3] };
        assert!(c.validate().is_err());

        assert!(SimulationConfig::from_json(r#"{"N": 4}"#).is_err());
    }

    #[test]
    fn warns_on_non_power_of_two() {
        let mut c = SimulationConfig::from_json(DOC).unwrap();
        c.n = 12;
        let w = c.validate().unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn user_vector_alias() {
        let ic: InitialCondition = serde_json::from_str(r#"{"kind":"vector","values":[1,0]}"#).unwrap();
        assert_eq!(ic.state(2, 0.0).unwrap().values(), &[1.0, 0.0]);
        let bad: InitialCondition = serde_json::from_str(r#"{"kind":"user_vector","values":[1,-1]}"#).unwrap();
        assert!(bad.state(2, 0.0).is_err());
    }

    #[test]
    fn representation_selection() {
        let mut c = SimulationConfig::from_json(DOC).unwrap();
        for (r, name) in [
            (Representation::Tt, "tt"),
            (Representation::Cp, "cp"),
            (Representation::Dense, "dense"),
        ] {
            c.representation = r;
            let set = c.build_kernels().unwrap();
            assert_eq!(set.select(3).unwrap().name(), name);
        }
    }
}
