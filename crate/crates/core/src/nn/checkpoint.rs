//! JSON model checkpoints.
//!
//! Layout (format version 1):
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "dims": { "features": d, "hidden1": h1, "hidden2": h2, "wavelet": m, "stack": true },
//!   "model": { ...ModelConfig... },
//!   "seed": 0,
//!   "matrices": [ { "name": "W1", "rows": d, "cols": h1, "data": [row-major f64] }, ... ]
//! }
//! ```
//!
//! Matrices appear in the order W1..W5.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::ModelConfig;
use super::params::{ModelDims, ModelParams, Parameters};
use crate::error::{GdnError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub dims: ModelDims,
    pub model: ModelConfig,
    pub seed: u64,
    pub matrices: Vec<NamedMatrix>,
}

impl Checkpoint {
    pub fn new(model: &ModelConfig, dims: ModelDims, seed: u64, params: &ModelParams) -> Self {
        let matrices = params
            .names()
            .into_iter()
            .zip(params.tensors())
            .map(|(name, t)| NamedMatrix {
                name: name.to_string(),
                rows: t.nrows(),
                cols: t.ncols(),
                data: t.as_standard_layout().iter().copied().collect(),
            })
            .collect();
        Checkpoint {
            format_version: FORMAT_VERSION,
            dims,
            model: model.clone(),
            seed,
            matrices,
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        if self.format_version != FORMAT_VERSION {
            return Err(GdnError::InvalidArgument(format!(
                "unsupported checkpoint format {}",
                self.format_version
            )));
        }
        let expected = ["W1", "W2", "W3", "W4", "W5"];
        if self.matrices.len() != expected.len() {
            return Err(GdnError::shape("checkpoint matrices", expected.len(), self.matrices.len()));
        }
        let mut mats = Vec::with_capacity(5);
        for (m, name) in self.matrices.iter().zip(expected) {
            if m.name != name {
                return Err(GdnError::InvalidArgument(format!("expected {name}, found {}", m.name)));
            }
            let a = Array2::from_shape_vec((m.rows, m.cols), m.data.clone())
                .map_err(|_| GdnError::shape("checkpoint matrix", m.rows * m.cols, m.data.len()))?;
            mats.push(a);
        }
        let mut it = mats.into_iter();
        let params = ModelParams {
            w1: it.next().unwrap(),
            w2: it.next().unwrap(),
            w3: it.next().unwrap(),
            w4: it.next().unwrap(),
            w5: it.next().unwrap(),
        };
        params.check_shapes(&self.dims)?;
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| GdnError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GdnError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
