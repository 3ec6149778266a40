//! The GCN encoder / GDN decoder autoencoder with hand-written gradients.

pub mod activation;
pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod model;
pub mod params;
pub mod train;

pub use adam::AdamState;
pub use loss::{masked_mse, masked_mse_grad};
pub use model::{Autoencoder, DecoderKind, ForwardCache, ModelConfig};
pub use params::{ModelDims, ModelParams, Parameters};
pub use checkpoint::Checkpoint;
pub use train::{reconstruct, train_autoencoder, TrainConfig, TrainingLog};
