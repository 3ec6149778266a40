use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::model::{Autoencoder, ModelConfig};
use super::params::ModelParams;
use crate::error::{GdnError, Result};
use crate::features::MaskedFeatures;
use crate::graph::{drop_edge, SparseGraph};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub lr: f64,
    pub epochs: usize,
    /// DropEdge keep probability for the encoder graph; 1.0 disables it.
    pub keep_prob: f64,
    pub seed: u64,
}

/// Training loss before each epoch's update, plus the loss after the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub losses: Vec<f64>,
    pub final_loss: f64,
}

/// Full-batch Adam on the masked MSE over observed entries. The model sees
/// only observed entries (the rest are zero) and DropEdge resamples the
/// encoder graph every epoch.
pub fn train_autoencoder(
    graph: Arc<SparseGraph>,
    data: &MaskedFeatures,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainingLog)> {
    if !(0.0..=1.0).contains(&config.keep_prob) {
        return Err(GdnError::InvalidArgument(format!(
            "keep probability {} outside [0, 1]",
            config.keep_prob
        )));
    }
    let model = Autoencoder::new(graph.clone(), data.x.ncols(), config.model.clone())?;
    let mut params = ModelParams::init(model.dims(), &mut rng::stream(config.seed, rng::PARAM_INIT))?;
    let mut adam = AdamState::new(&params);
    let mut edge_rng = rng::stream(config.seed, rng::DROP_EDGE);
    let x_in = data.observed_input();

    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let encoder_graph = (config.keep_prob < 1.0)
            .then(|| Arc::new(drop_edge(&graph, config.keep_prob, &mut edge_rng)));
        let (loss, grads) = model.loss_and_grads(
            &params,
            x_in.view(),
            data.x.view(),
            data.train_mask.view(),
            encoder_graph,
        )?;
        if !loss.is_finite() {
            return Err(GdnError::NonFinite(format!("training loss at epoch {epoch}")));
        }
        log::debug!("epoch {epoch}: loss {loss:.6}");
        losses.push(loss);
        adam.step(&mut params, &grads, config.lr)?;
    }
    let final_loss = model.loss(&params, x_in.view(), data.x.view(), data.train_mask.view())?;
    Ok((params, TrainingLog { losses, final_loss }))
}

/// Evaluation-mode reconstruction from the observed entries (no DropEdge).
pub fn reconstruct(
    graph: Arc<SparseGraph>,
    data: &MaskedFeatures,
    model_config: &ModelConfig,
    params: &ModelParams,
) -> Result<Array2<f64>> {
    let model = Autoencoder::new(graph, data.x.ncols(), model_config.clone())?;
    let (out, _) = model.forward(params, data.observed_input().view(), None)?;
    Ok(out)
}
