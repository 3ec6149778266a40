use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baselines::{knn_impute, mean_impute, svd_impute, KNN_DEFAULT_K, SVD_DEFAULT_ITERS, SVD_DEFAULT_RANK};
use super::evaluate_rmse;
use crate::error::{GdnError, Result};
use crate::features::{apply_explicit_mask, generate_mask, FeatureMatrix, MaskedFeatures};
use crate::graph::SparseGraph;
use crate::nn::{reconstruct, train_autoencoder, DecoderKind, ModelConfig, TrainConfig};
use crate::report::{config_hash, mean};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mean,
    Knn,
    Svd,
    Gdn,
    InverseOnly,
    GcnDecoder,
    Gala,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Mean,
        Method::Knn,
        Method::Svd,
        Method::Gdn,
        Method::InverseOnly,
        Method::GcnDecoder,
        Method::Gala,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Knn => "knn",
            Method::Svd => "svd",
            Method::Gdn => "gdn",
            Method::InverseOnly => "inverse_only",
            Method::GcnDecoder => "gcn_decoder",
            Method::Gala => "gala",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Decoder used by the neural methods; `None` for the baselines.
    pub fn decoder(self) -> Option<DecoderKind> {
        match self {
            Method::Gdn => Some(DecoderKind::Gdn),
            Method::InverseOnly => Some(DecoderKind::InverseOnly),
            Method::GcnDecoder => Some(DecoderKind::GcnDecoder),
            Method::Gala => Some(DecoderKind::Gala),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub missing_rate: f64,
    pub seeds: Vec<u64>,
    pub knn_k: usize,
    pub svd_rank: usize,
    pub svd_iters: usize,
    pub mean_per_column: bool,
    /// Shared by every neural method; its `decoder` field is overridden.
    pub model: ModelConfig,
    pub lr: f64,
    pub epochs: usize,
    pub keep_prob: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            methods: vec![Method::Mean, Method::Knn, Method::Svd, Method::Gdn],
            missing_rate: 0.1,
            seeds: (0..5).collect(),
            knn_k: KNN_DEFAULT_K,
            svd_rank: SVD_DEFAULT_RANK,
            svd_iters: SVD_DEFAULT_ITERS,
            mean_per_column: false,
            model: ModelConfig::new(256, 128),
            lr: 0.005,
            epochs: 200,
            keep_prob: 1.0,
        }
    }
}

impl BenchmarkConfig {
    pub fn train_config(&self, method: Method, seed: u64) -> Option<TrainConfig> {
        let decoder = method.decoder()?;
        Some(TrainConfig {
            model: ModelConfig {
                decoder,
                ..self.model.clone()
            },
            lr: self.lr,
            epochs: self.epochs,
            keep_prob: self.keep_prob,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub method: String,
    pub rmse_mean: f64,
    pub rmse_per_seed: Vec<f64>,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub seconds: f64,
}

fn impute_once(
    graph: &Arc<SparseGraph>,
    mf: &MaskedFeatures,
    config: &BenchmarkConfig,
    method: Method,
    seed: u64,
) -> Result<Array2<f64>> {
    match method {
        Method::Mean => mean_impute(mf, config.mean_per_column),
        Method::Knn => knn_impute(mf, config.knn_k),
        Method::Svd => svd_impute(mf, config.svd_rank, config.svd_iters),
        _ => {
            let tc = config.train_config(method, seed).expect("neural method");
            let (params, log) = train_autoencoder(graph.clone(), mf, &tc)?;
            log::info!(
                "{} seed {seed}: final training loss {:.6}",
                method.name(),
                log.final_loss
            );
            reconstruct(graph.clone(), mf, &tc.model, &params)
        }
    }
}

/// Mask for one seed: the explicit mask if given, else a fresh random one.
fn mask_for(
    features: &FeatureMatrix,
    config: &BenchmarkConfig,
    explicit: Option<&Array2<bool>>,
    seed: u64,
) -> Result<MaskedFeatures> {
    match explicit {
        Some(m) => apply_explicit_mask(features, m),
        None => generate_mask(features, config.missing_rate, &mut rng::stream(seed, rng::MASK)),
    }
}

/// Runs every configured method for every seed. Each seed draws one mask
/// that all methods share; seeds run in parallel and results are collected
/// in seed order, so reports do not depend on the thread count.
pub fn run_benchmark(
    graph: Arc<SparseGraph>,
    features: &FeatureMatrix,
    config: &BenchmarkConfig,
    explicit_mask: Option<&Array2<bool>>,
) -> Result<Vec<ImputationReport>> {
    if config.seeds.is_empty() {
        return Err(GdnError::InvalidArgument("at least one seed is required".into()));
    }
    if config.methods.is_empty() {
        return Err(GdnError::InvalidArgument("no methods selected".into()));
    }
    if graph.n_nodes() != features.nrows() {
        return Err(GdnError::shape("features rows", graph.n_nodes(), features.nrows()));
    }
    let hash = config_hash(config)?;
    let masks: Vec<MaskedFeatures> = config
        .seeds
        .iter()
        .map(|&s| mask_for(features, config, explicit_mask, s))
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let start = Instant::now();
        let rmses: Vec<f64> = config
            .seeds
            .par_iter()
            .zip(masks.par_iter())
            .map(|(&seed, mf)| {
                let pred = impute_once(&graph, mf, config, method, seed)?;
                evaluate_rmse(mf.x.view(), pred.view(), mf.test_mask.view())
            })
            .collect::<Result<_>>()?;
        reports.push(ImputationReport {
            method: method.name().to_string(),
            rmse_mean: mean(&rmses),
            rmse_per_seed: rmses,
            seeds: config.seeds.clone(),
            config_hash: hash.clone(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub missing_rate: f64,
    pub method: String,
    pub rmse: f64,
}

/// Benchmark at each missing rate; one row per (rate, method) holding the
/// seed-averaged RMSE.
pub fn run_sweep(
    graph: Arc<SparseGraph>,
    features: &FeatureMatrix,
    config: &BenchmarkConfig,
    rates: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &rate in rates {
        let cfg = BenchmarkConfig {
            missing_rate: rate,
            ..config.clone()
        };
        for r in run_benchmark(graph.clone(), features, &cfg, None)? {
            rows.push(SweepRow {
                missing_rate: rate,
                method: r.method,
                rmse: r.rmse_mean,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("missing_rate,method,rmse\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.missing_rate, r.method, r.rmse));
    }
    out
}
