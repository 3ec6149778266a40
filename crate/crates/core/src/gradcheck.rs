//! Central finite-difference checks of the hand-written gradients.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{generate_mask, FeatureMatrix};
use crate::generation::model::{generation_loss, sample_eta, variational_encode, GenDims, GenParams};
use crate::graph::SparseGraph;
use crate::laplacian::LaplacianOperator;
use crate::nn::{Autoencoder, DecoderKind, ModelConfig, ModelParams, Parameters};
use crate::rng;
use crate::synth::erdos_renyi;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// `|a - b| / max(|a|, |b|, 1e-6)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCheck {
    pub name: String,
    pub entries: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub model: String,
    pub nodes: usize,
    pub seed: u64,
    pub tensors: Vec<TensorCheck>,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= TOLERANCE
    }
}

/// Compares `analytic` with central differences of `loss` over every entry
/// of every tensor of `params`.
pub fn check_parameters<P, F>(model: &str, nodes: usize, seed: u64, params: &P, analytic: &P, loss: F) -> Result<GradCheckReport>
where
    P: Parameters + Clone,
    F: Fn(&P) -> Result<f64>,
{
    let mut tensors = Vec::new();
    let mut work = params.clone();
    for (t, name) in params.names().into_iter().enumerate() {
        let grad = analytic.tensors()[t].clone();
        let mut worst: f64 = 0.0;
        for idx in 0..grad.len() {
            let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
            let orig = work.tensors()[t][[r, c]];
            work.tensors_mut()[t][[r, c]] = orig + STEP;
            let up = loss(&work)?;
            work.tensors_mut()[t][[r, c]] = orig - STEP;
            let down = loss(&work)?;
            work.tensors_mut()[t][[r, c]] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            worst = worst.max(relative_error(grad[[r, c]], numeric));
        }
        tensors.push(TensorCheck {
            name: name.to_string(),
            entries: grad.len(),
            max_rel_error: worst,
        });
    }
    let max_rel_error = tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport {
        model: model.to_string(),
        nodes,
        seed,
        tensors,
        max_rel_error,
    })
}

fn random_graph(nodes: usize, seed: u64) -> Result<Arc<SparseGraph>> {
    let p = (3.0 / nodes.max(2) as f64).min(1.0);
    Ok(Arc::new(erdos_renyi(nodes, p, &mut rng::stream(seed, rng::DATA))?))
}

/// Masked-MSE gradients of the full encoder/decoder on a random graph.
pub fn autoencoder_gradcheck(nodes: usize, seed: u64, decoder: DecoderKind) -> Result<GradCheckReport> {
    let graph = random_graph(nodes, seed)?;
    let mut r = rng::stream(seed, rng::SIGNAL);
    let features = FeatureMatrix::dense(Array2::from_shape_simple_fn((nodes, 5), || r.random::<f64>()));
    let mf = generate_mask(&features, 0.2, &mut rng::stream(seed, rng::MASK))?;
    let config = ModelConfig {
        decoder,
        ..ModelConfig::new(6, 4)
    };
    let model = Autoencoder::new(graph, 5, config)?;
    let params = ModelParams::init(model.dims(), &mut rng::stream(seed, rng::PARAM_INIT))?;
    let x_in = mf.observed_input();
    let (_, grads) = model.loss_and_grads(&params, x_in.view(), mf.x.view(), mf.train_mask.view(), None)?;
    check_parameters(&format!("autoencoder/{}", decoder.name()), nodes, seed, &params, &grads, |p| {
        model.loss(p, x_in.view(), mf.x.view(), mf.train_mask.view())
    })
}

/// Generation-objective gradients with the reparameterization noise frozen.
pub fn generation_gradcheck(nodes: usize, seed: u64) -> Result<GradCheckReport> {
    let graph = random_graph(nodes, seed)?;
    let op = LaplacianOperator::symmetric(graph);
    let labels = 4;
    let x = Array2::from_shape_fn((nodes, labels), |(i, j)| if (i * 7 + 3) % labels == j { 1.0 } else { 0.0 });
    let dims = GenDims {
        features: labels,
        hidden: 6,
        latent: 3,
        wavelet: 5,
    };
    let params = GenParams::init(
        &dims,
        &mut rng::stream(seed, rng::PARAM_INIT),
        &mut rng::stream(seed, rng::DECODER_INIT),
    )?;
    let eta = sample_eta(nodes, dims.latent, &mut rng::stream(seed, rng::REPARAM));
    let filters = DecoderKind::Gdn.filters(3, 1.0)?;
    let slope = crate::nn::activation::LEAKY_SLOPE;
    let loss = |p: &GenParams| -> Result<(f64, GenParams)> {
        let latent = variational_encode(&op, x.view(), p, eta.clone(), slope)?;
        let (parts, g) = generation_loss(&op, x.view(), &latent, p, &filters, 1.0, slope)?;
        Ok((parts.total, g))
    };
    let (_, grads) = loss(&params)?;
    check_parameters("generation", nodes, seed, &params, &grads, |p| loss(p).map(|l| l.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1e-9, 0.0) - 1e-3).abs() < 1e-12);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_instances_pass() {
        for kind in DecoderKind::ALL {
            let r = autoencoder_gradcheck(8, 1, kind).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let r = generation_gradcheck(8, 1).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
