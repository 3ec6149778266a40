//! Hyper-parameter profiles and JSON config files.
//!
//! Resolution order, lowest to highest: built-in defaults, `--profile`,
//! `--config` file, explicit flags.

use std::path::Path;

use gdn_core::imputation::BenchmarkConfig;
use gdn_core::nn::ModelConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Per-dataset training defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub name: &'static str,
    pub hidden1: usize,
    pub hidden2: usize,
    pub lr: f64,
    pub epochs: usize,
    pub keep_prob: f64,
}

pub const PROFILES: [Profile; 7] = [
    Profile { name: "ciao", hidden1: 256, hidden2: 128, lr: 0.005, epochs: 200, keep_prob: 1.0 },
    Profile { name: "douban", hidden1: 256, hidden2: 128, lr: 0.005, epochs: 200, keep_prob: 0.5 },
    Profile { name: "cora", hidden1: 512, hidden2: 64, lr: 0.002, epochs: 200, keep_prob: 0.5 },
    Profile { name: "citeseer", hidden1: 256, hidden2: 128, lr: 0.005, epochs: 200, keep_prob: 0.5 },
    Profile { name: "amaphoto", hidden1: 256, hidden2: 128, lr: 0.005, epochs: 100, keep_prob: 1.0 },
    Profile { name: "amacomp", hidden1: 256, hidden2: 128, lr: 0.005, epochs: 100, keep_prob: 1.0 },
    Profile { name: "synthetic", hidden1: 64, hidden2: 32, lr: 0.005, epochs: 200, keep_prob: 1.0 },
];

pub fn profile(name: &str) -> CliResult<Profile> {
    let lower = name.to_ascii_lowercase();
    PROFILES.iter().find(|p| p.name == lower).copied().ok_or_else(|| {
        let names: Vec<&str> = PROFILES.iter().map(|p| p.name).collect();
        CliError::usage(format!("unknown profile '{name}' (expected one of {})", names.join(", ")))
    })
}

impl Profile {
    pub fn apply(&self, config: &mut BenchmarkConfig) {
        config.model = ModelConfig {
            hidden1: self.hidden1,
            hidden2: self.hidden2,
            ..config.model.clone()
        };
        config.lr = self.lr;
        config.epochs = self.epochs;
        config.keep_prob = self.keep_prob;
    }
}

/// Reads a config file as a JSON object. A missing or unreadable file or
/// malformed JSON is an input error; a non-object is a schema error.
pub fn read_config_file(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::usage(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Removes a string-valued key (e.g. a data path) from a config object.
pub fn take_string(map: &mut Map<String, Value>, key: &str) -> CliResult<Option<String>> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(CliError::usage(format!("{key}: expected a string, found {other}"))),
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Overlays `file` on `base` and re-validates the result against `T`'s
/// schema. Unknown keys and type errors are reported with their key path.
pub fn overlay<T: Serialize + DeserializeOwned>(base: &T, file: Map<String, Value>) -> CliResult<T> {
    let mut value = serde_json::to_value(base).map_err(|e| CliError::usage(e.to_string()))?;
    merge(&mut value, Value::Object(file));
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::usage(format!("config key '{path}': {}", e.into_inner()))
    })
}
