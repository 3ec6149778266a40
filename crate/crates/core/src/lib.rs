//! Graph deconvolution toolkit.

pub mod error;
pub mod features;
pub mod generation;
pub mod gradcheck;
pub mod graph;
pub mod imputation;
pub mod laplacian;
pub mod nn;
pub mod noise;
pub mod report;
pub mod oracle;
pub mod retention;
pub mod rng;
pub mod spectral;
pub mod synth;

pub use error::{GdnError, Result};
