//! JSON state files.
//!
//! ```json
//! {
//!   "dims": [2, 2],
//!   "matrix": [[[0.5, 0.0], ...], ...],
//!   "metadata": {"name": "isotropic", "generator": "ebits 0.1.0", "seed": 7, "params": {"fidelity": 0.75}}
//! }
//! ```
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so write → read → write is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ebits::qmat::ComplexMatrix;
use ebits::DensityMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix, metadata: Option<Metadata>) -> Self {
        let m = rho.matrix();
        let n = rho.dim();
        let matrix = (0..n).map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dims: [rho.dim_a(), rho.dim_b()], matrix, metadata }
    }

    /// Validates shape, then the density-matrix conditions.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let [da, db] = self.dims;
        let n = da
            .checked_mul(db)
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("field `dims`: invalid dimensions {da}x{db}"))?;
        if self.matrix.len() != n {
            bail!("field `matrix`: expected {n} rows for dims {da}x{db}, got {}", self.matrix.len());
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                bail!("field `matrix[{i}]`: expected {n} entries, got {}", row.len());
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    bail!("field `matrix[{i}][{j}]`: non-finite entry");
                }
                data.push(Complex64::new(re, im));
            }
        }
        let mat = ComplexMatrix::from_vec(n, n, data)?;
        DensityMatrix::new(da, db, mat).context("field `matrix`: not a density matrix")
    }

    /// Pretty JSON with one matrix row per line.
    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self.matrix.iter().map(|r| format!("    {}", compact(r))).collect();
        let mut s = format!("{{\n  \"dims\": {},\n  \"matrix\": [\n{}\n  ]", compact(&self.dims), rows.join(",\n"));
        if let Some(meta) = &self.metadata {
            s.push_str(&format!(",\n  \"metadata\": {}", compact(meta)));
        }
        s.push_str("\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("state file: {e}"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}

fn compact<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("state files always serialize")
}
