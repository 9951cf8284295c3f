//! Serializable kernel descriptions and the dense oracle builder.
//!
//! ```json
//! {"type": "brownian", "D": 3, "mu": [0.333, -0.333, 0.0]}
//! {"type": "constant", "D": 3, "c": 1.0}
//! {"type": "table", "D": 2, "table_path": "k2.bin"}
//! ```
//!
//! Table files hold `N^D` values in row-major index order (first index
//! slowest, sizes from 1). Binary tables are raw little-endian `f64`; text
//! tables are whitespace- or comma-separated decimal numbers. The format is
//! taken from the optional `"format"` field, otherwise from the extension
//! (`.txt`, `.csv`, `.dat` are text, anything else binary).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::brownian::{brownian_cp, brownian_element, build_brownian_tt, permutation_sum, BrownianSpec};
use crate::error::{Error, Result};
use crate::tensor::{CPKernel, DenseKernel, MultiIndex, TTKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Binary,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Brownian {
        #[serde(rename = "D")]
        dim: usize,
        mu: BrownianSpec,
    },
    Constant {
        #[serde(rename = "D")]
        dim: usize,
        c: f64,
    },
    Table {
        #[serde(rename = "D")]
        dim: usize,
        table_path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<TableFormat>,
    },
}

impl KernelSpec {
    /// Collision order `d` this kernel describes.
    pub fn order(&self) -> usize {
        match self {
            KernelSpec::Brownian { dim, .. } | KernelSpec::Constant { dim, .. } | KernelSpec::Table { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order() < 2 {
            return Err(Error::invalid(format!("collision order must be at least 2, got {}", self.order())));
        }
        match self {
            KernelSpec::Brownian { dim, mu } if mu.dim() != *dim => Err(Error::invalid(format!(
                "Brownian kernel declares D = {dim} but has {} exponents",
                mu.dim()
            ))),
            KernelSpec::Constant { c, .. } if !c.is_finite() => Err(Error::invalid("constant kernel value must be finite")),
            _ => Ok(()),
        }
    }

    /// Makes a relative table path relative to `base` (usually the config's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        if let KernelSpec::Table { table_path, .. } = self {
            if table_path.is_relative() {
                *table_path = base.join(&*table_path);
            }
        }
    }

    /// Exact TT form, when one is known analytically.
    pub fn to_tt(&self, n: usize) -> Result<Option<TTKernel>> {
        self.validate()?;
        match self {
            KernelSpec::Brownian { mu, .. } => build_brownian_tt(mu, n).map(Some),
            KernelSpec::Constant { dim, c } => TTKernel::constant(*dim, n, *c).map(Some),
            KernelSpec::Table { .. } => Ok(None),
        }
    }

    /// Exact CP form, when one is known analytically.
    pub fn to_cp(&self, n: usize) -> Result<Option<CPKernel>> {
        self.validate()?;
        match self {
            KernelSpec::Brownian { mu, .. } => brownian_cp(mu, n).map(Some),
            KernelSpec::Constant { dim, c } => CPKernel::constant(*dim, n, *c).map(Some),
            KernelSpec::Table { .. } => Ok(None),
        }
    }
}

/// Dense kernel filled element by element from its description.
pub fn dense_from_spec(spec: &KernelSpec, n: usize, budget: u128) -> Result<DenseKernel> {
    spec.validate()?;
    match spec {
        KernelSpec::Brownian { dim, mu } => {
            // surface the permutation guard before allocating
            brownian_element(mu, &MultiIndex::new(vec![1; *dim])?)?;
            DenseKernel::from_fn(*dim, n, budget, |idx| permutation_sum(mu.exponents(), idx))
        }
        KernelSpec::Constant { dim, c } => DenseKernel::from_fn(*dim, n, budget, |_| *c),
        KernelSpec::Table {
            dim,
            table_path,
            format,
        } => {
            let format = format.unwrap_or_else(|| infer_format(table_path));
            let values = read_table(table_path, format)?;
            DenseKernel::from_values(*dim, n, budget, values)
        }
    }
}

fn infer_format(path: &Path) -> TableFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("txt" | "csv" | "dat") => TableFormat::Text,
        _ => TableFormat::Binary,
    }
}

pub fn read_table(path: &Path, format: TableFormat) -> Result<Vec<f64>> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        TableFormat::Binary => {
            let bytes = std::fs::read(path).map_err(io_err)?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Parse(format!(
                    "{}: binary table length {} is not a multiple of 8",
                    path.display(),
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect())
        }
        TableFormat::Text => {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            text.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{}: bad number {t:?}: {e}", path.display())))
                })
                .collect()
        }
    }
}

/// Writes a binary table in the layout [`read_table`] expects.
pub fn write_binary_table(path: &Path, values: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
