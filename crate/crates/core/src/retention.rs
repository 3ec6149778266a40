//! How much high-frequency content different decoders reproduce.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::MaskedFeatures;
use crate::laplacian::LaplacianOperator;
use crate::nn::{reconstruct, train_autoencoder, DecoderKind, ModelConfig, TrainConfig};
use crate::spectral::{eigen_decompose, DEFAULT_ORACLE_LIMIT};
use crate::synth::mixed_frequency_surrogate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetentionConfig {
    pub nodes: usize,
    pub columns: usize,
    pub cutoff: f64,
    pub model: ModelConfig,
    pub lr: f64,
    pub epochs: usize,
    pub decoders: Vec<DecoderKind>,
}

impl Default for RetentionConfig {
    fn default() -> Self {
        RetentionConfig {
            nodes: 200,
            columns: 8,
            cutoff: 1.0,
            model: ModelConfig::new(64, 32),
            lr: 0.005,
            epochs: 200,
            decoders: vec![DecoderKind::Gdn, DecoderKind::GcnDecoder],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionResult {
    pub seed: u64,
    /// Energy fraction above the cutoff in the target signal.
    pub input_fraction: f64,
    /// `(decoder name, energy fraction above the cutoff of X')`.
    pub decoders: Vec<(String, f64)>,
}

/// Trains each decoder to reconstruct a fully observed mixed-frequency
/// signal on a fresh synthetic graph and measures the spectral energy of
/// its output above `cutoff`.
pub fn spectral_retention(config: &RetentionConfig, seed: u64) -> Result<RetentionResult> {
    let ds = mixed_frequency_surrogate(config.nodes, config.columns, seed)?;
    let es = eigen_decompose(&LaplacianOperator::symmetric(ds.graph.clone()), DEFAULT_ORACLE_LIMIT)?;
    let data = MaskedFeatures::fully_observed(ds.features.values.clone());
    let input_fraction = es.energy_fraction_above(data.x.view(), config.cutoff)?;
    let mut decoders = Vec::new();
    for &decoder in &config.decoders {
        let tc = TrainConfig {
            model: ModelConfig {
                decoder,
                ..config.model.clone()
            },
            lr: config.lr,
            epochs: config.epochs,
            keep_prob: 1.0,
            seed,
        };
        let (params, _) = train_autoencoder(ds.graph.clone(), &data, &tc)?;
        let out = reconstruct(ds.graph.clone(), &data, &tc.model, &params)?;
        decoders.push((decoder.name().to_string(), es.energy_fraction_above(out.view(), config.cutoff)?));
    }
    Ok(RetentionResult {
        seed,
        input_fraction,
        decoders,
    })
}
