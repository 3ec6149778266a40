use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::edge_metrics;
use super::model::{generation_loss, sample_eta, variational_encode, GenDims, GenParams};
use crate::error::{GdnError, Result};
use crate::laplacian::LaplacianOperator;
use crate::nn::activation::LEAKY_SLOPE;
use crate::nn::{AdamState, DecoderKind};
use crate::report::{config_hash, mean};
use crate::rng;
use crate::synth::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub hidden: usize,
    pub latent: usize,
    /// Wavelet-stage width of the feature decoder; defaults to `hidden`.
    pub wavelet: Option<usize>,
    pub order: usize,
    pub scale: f64,
    pub lr: f64,
    pub iters: usize,
    /// Weight of the feature term; 0 gives the plain variational model.
    pub feature_weight: f64,
    pub train_fraction: f64,
    pub leaky_slope: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            hidden: 32,
            latent: 16,
            wavelet: None,
            order: 3,
            scale: 1.0,
            lr: 0.01,
            iters: 200,
            feature_weight: 1.0,
            train_fraction: 0.5,
            leaky_slope: LEAKY_SLOPE,
        }
    }
}

impl GenerationConfig {
    pub fn dims(&self, features: usize) -> GenDims {
        GenDims {
            features,
            hidden: self.hidden,
            latent: self.latent,
            wavelet: self.wavelet.unwrap_or(self.hidden),
        }
    }
}

/// Test-split metrics of one seed, averaged over test graphs on which each
/// metric is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub log_lik: Option<f64>,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub feature_term: bool,
    pub seeds: Vec<u64>,
    /// Mean per-pair log-likelihood `log p(A|Z)`.
    pub log_lik: Option<f64>,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
    pub log_lik_per_seed: Vec<Option<f64>>,
    pub auc_per_seed: Vec<Option<f64>>,
    pub ap_per_seed: Vec<Option<f64>>,
    pub config_hash: String,
    pub seconds: f64,
}

struct Prepared {
    op: LaplacianOperator,
    x: Array2<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| mean(&v))
}

/// Trains on a random `train_fraction` of the graphs for one seed and
/// evaluates edge reconstruction (with `Z = mu`) on the rest.
pub fn train_generator(
    dataset: &[LabeledGraph],
    n_labels: usize,
    config: &GenerationConfig,
    seed: u64,
) -> Result<(GenParams, SeedResult)> {
    if dataset.len() < 2 {
        return Err(GdnError::InvalidArgument("need at least two graphs to split".into()));
    }
    if let Some(bad) = dataset.iter().flat_map(|g| &g.labels).find(|&&l| l >= n_labels) {
        return Err(GdnError::InvalidArgument(format!("label {bad} outside 0..{n_labels}")));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng::stream(seed, rng::SPLIT));
    let n_train = ((dataset.len() as f64 * config.train_fraction).round() as usize).clamp(1, dataset.len() - 1);
    let prep = |i: &usize| Prepared {
        op: LaplacianOperator::symmetric(dataset[*i].graph.clone()),
        x: dataset[*i].one_hot(n_labels),
    };
    let train: Vec<Prepared> = order[..n_train].iter().map(prep).collect();
    let test: Vec<Prepared> = order[n_train..].iter().map(prep).collect();

    let dims = config.dims(n_labels);
    let mut params = GenParams::init(
        &dims,
        &mut rng::stream(seed, rng::PARAM_INIT),
        &mut rng::stream(seed, rng::DECODER_INIT),
    )?;
    let filters = DecoderKind::Gdn.filters(config.order, config.scale)?;
    let mut adam = AdamState::new(&params);
    let mut noise = rng::stream(seed, rng::REPARAM);
    let mut final_loss = f64::NAN;
    for it in 0..config.iters {
        let mut total = 0.0;
        for g in &train {
            let eta = sample_eta(g.x.nrows(), dims.latent, &mut noise);
            let latent = variational_encode(&g.op, g.x.view(), &params, eta, config.leaky_slope)?;
            let (parts, grads) = generation_loss(
                &g.op,
                g.x.view(),
                &latent,
                &params,
                &filters,
                config.feature_weight,
                config.leaky_slope,
            )?;
            if !parts.total.is_finite() {
                return Err(GdnError::NonFinite(format!("generation loss at iteration {it}")));
            }
            total += parts.total;
            adam.step(&mut params, &grads, config.lr)?;
        }
        final_loss = total / train.len() as f64;
        log::debug!("iteration {it}: mean loss {final_loss:.6}");
    }

    let metrics: Vec<_> = test
        .iter()
        .map(|g| {
            let zero = Array2::zeros((g.x.nrows(), dims.latent));
            let latent = variational_encode(&g.op, g.x.view(), &params, zero, config.leaky_slope)?;
            Ok(edge_metrics(g.op.graph(), latent.mu.view()))
        })
        .collect::<Result<_>>()?;
    let result = SeedResult {
        seed,
        log_lik: mean_defined(metrics.iter().map(|m| m.log_lik)),
        auc: mean_defined(metrics.iter().map(|m| m.auc)),
        ap: mean_defined(metrics.iter().map(|m| m.ap)),
        final_loss,
    };
    Ok((params, result))
}

/// One training run per seed (in parallel), summarized.
pub fn run_generation(
    dataset: &[LabeledGraph],
    n_labels: usize,
    config: &GenerationConfig,
    seeds: &[u64],
) -> Result<(GenerationReport, Vec<SeedResult>)> {
    if seeds.is_empty() {
        return Err(GdnError::InvalidArgument("at least one seed is required".into()));
    }
    let start = std::time::Instant::now();
    let results: Vec<SeedResult> = seeds
        .par_iter()
        .map(|&s| train_generator(dataset, n_labels, config, s).map(|r| r.1))
        .collect::<Result<_>>()?;
    let pick = |f: fn(&SeedResult) -> Option<f64>| results.iter().map(f).collect::<Vec<_>>();
    let report = GenerationReport {
        feature_term: config.feature_weight != 0.0,
        seeds: seeds.to_vec(),
        log_lik: mean_defined(results.iter().map(|r| r.log_lik)),
        auc: mean_defined(results.iter().map(|r| r.auc)),
        ap: mean_defined(results.iter().map(|r| r.ap)),
        log_lik_per_seed: pick(|r| r.log_lik),
        auc_per_seed: pick(|r| r.auc),
        ap_per_seed: pick(|r| r.ap),
        config_hash: config_hash(config)?,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, results))
}

/// Largest label + 1 over the collection.
pub fn label_count(dataset: &[LabeledGraph]) -> usize {
    dataset.iter().flat_map(|g| g.labels.iter()).max().map_or(0, |&m| m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{molecule_surrogate, MOLECULE_LABELS};

    fn quick() -> GenerationConfig {
        GenerationConfig {
            iters: 3,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_report() {
        let data = molecule_surrogate(12, 0).unwrap();
        let a = train_generator(&data, MOLECULE_LABELS, &quick(), 1).unwrap();
        let b = train_generator(&data, MOLECULE_LABELS, &quick(), 1).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn zero_weight_encoder_trajectory_matches_plain_model() {
        let data = molecule_surrogate(8, 2).unwrap();
        let off = GenerationConfig {
            feature_weight: 0.0,
            ..quick()
        };
        let (p1, r1) = train_generator(&data, MOLECULE_LABELS, &off, 3).unwrap();
        let (p2, r2) = train_generator(&data, MOLECULE_LABELS, &off, 3).unwrap();
        assert_eq!(p1.w0, p2.w0);
        assert_eq!(r1, r2);
        // the decoder is never touched
        let init = GenParams::init(
            &off.dims(MOLECULE_LABELS),
            &mut rng::stream(3, rng::PARAM_INIT),
            &mut rng::stream(3, rng::DECODER_INIT),
        )
        .unwrap();
        assert_eq!(p1.w4, init.w4);
    }

    #[test]
    fn labels_out_of_range_rejected() {
        let data = molecule_surrogate(4, 0).unwrap();
        assert!(train_generator(&data, 2, &quick(), 0).is_err());
    }
}
