//! Variational graph autoencoder with an optional graph-deconvolution
//! feature-reconstruction term.

pub mod dataset;
pub mod metrics;
pub mod model;
pub mod train;

pub use dataset::{load_molecules, load_tu_dataset, parse_molecules, write_molecules};
pub use metrics::{average_precision, edge_metrics, roc_auc, EdgeMetrics};
pub use model::{
    edge_probability, generation_loss, kl_divergence, variational_encode, GenDims, GenParams,
    LatentState, LossParts,
};
pub use train::{label_count, run_generation, train_generator, GenerationConfig, GenerationReport, SeedResult};
