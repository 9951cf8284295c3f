//! CSV and manifest writers. Every number is printed with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use multikin_core::{ConcentrationState, MomentSeries, SimulationConfig};
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn moments_csv(path: &Path, series: &MomentSeries) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,M0,M1,M2,min_n")?;
    for r in &series.records {
        writeln!(w, "{},{},{},{},{}", fmt(r.t), fmt(r.m0), fmt(r.m1), fmt(r.m2), fmt(r.min_n))?;
    }
    w.flush()
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("n_{step}.csv"))
}

/// `k,n` rows for sizes `1..=N`.
pub fn snapshot_csv(path: &Path, state: &ConcentrationState) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "k,n")?;
    for (i, v) in state.values().iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt(*v))?;
    }
    w.flush()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub workers: usize,
    pub warnings: Vec<String>,
    pub config: SimulationConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: &SimulationConfig, warnings: Vec<String>) -> Self {
        RunManifest {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: multikin_core::VERSION.to_string(),
            command: command.to_string(),
            workers: config.execution.workers,
            warnings,
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest is serializable");
        std::fs::write(path, text + "\n")
    }
}
