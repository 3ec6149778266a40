use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};

/// Parameter containers that the optimizer and gradient checks can walk.
pub trait Parameters {
    fn names(&self) -> Vec<&'static str>;
    fn tensors(&self) -> Vec<&Array2<f64>>;
    fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>>;

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Layer widths of the autoencoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Feature dimension `d` (input and output).
    pub features: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    /// Width `m` of the inverse-operator and wavelet stages.
    pub wavelet: usize,
    /// Whether the decoder reads `[H1 | H2]` (true) or `H2` alone.
    pub stack: bool,
}

impl ModelDims {
    pub fn decoder_input(&self) -> usize {
        if self.stack {
            self.hidden1 + self.hidden2
        } else {
            self.hidden2
        }
    }
}

/// Encoder weights `W1: d×h1`, `W2: h1×h2`; decoder weights
/// `W3: (h1+h2)×m`, `W4: m×m`, `W5: m×d`. No biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub w3: Array2<f64>,
    pub w4: Array2<f64>,
    pub w5: Array2<f64>,
}

/// Glorot-uniform matrix: entries uniform in `±sqrt(6 / (rows + cols))`.
pub fn glorot_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..bound))
}

impl ModelParams {
    pub fn init<R: Rng + ?Sized>(dims: &ModelDims, rng: &mut R) -> Result<Self> {
        let ModelDims {
            features,
            hidden1,
            hidden2,
            wavelet,
            ..
        } = *dims;
        if [features, hidden1, hidden2, wavelet].contains(&0) {
            return Err(GdnError::InvalidArgument(format!(
                "all layer widths must be positive: {dims:?}"
            )));
        }
        Ok(ModelParams {
            w1: glorot_uniform(features, hidden1, rng),
            w2: glorot_uniform(hidden1, hidden2, rng),
            w3: glorot_uniform(dims.decoder_input(), wavelet, rng),
            w4: glorot_uniform(wavelet, wavelet, rng),
            w5: glorot_uniform(wavelet, features, rng),
        })
    }

    pub fn zeros_like(&self) -> Self {
        let z = |a: &Array2<f64>| Array2::zeros(a.dim());
        ModelParams {
            w1: z(&self.w1),
            w2: z(&self.w2),
            w3: z(&self.w3),
            w4: z(&self.w4),
            w5: z(&self.w5),
        }
    }

    /// Checks that the shapes chain: `d→h1→h2`, `(h1+h2 | h2)→m→m→d`.
    pub fn check_shapes(&self, dims: &ModelDims) -> Result<()> {
        let expect = [
            (dims.features, dims.hidden1),
            (dims.hidden1, dims.hidden2),
            (dims.decoder_input(), dims.wavelet),
            (dims.wavelet, dims.wavelet),
            (dims.wavelet, dims.features),
        ];
        for ((name, t), e) in self.names().into_iter().zip(self.tensors()).zip(expect) {
            if t.dim() != e {
                return Err(GdnError::shape(name, e, t.dim()));
            }
        }
        Ok(())
    }
}

impl Parameters for ModelParams {
    fn names(&self) -> Vec<&'static str> {
        vec!["W1", "W2", "W3", "W4", "W5"]
    }

    fn tensors(&self) -> Vec<&Array2<f64>> {
        vec![&self.w1, &self.w2, &self.w3, &self.w4, &self.w5]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        vec![
            &mut self.w1,
            &mut self.w2,
            &mut self.w3,
            &mut self.w4,
            &mut self.w5,
        ]
    }
}
