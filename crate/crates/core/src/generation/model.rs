use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::laplacian::LaplacianOperator;
use crate::nn::activation::{leaky_relu, leaky_relu_backward};
use crate::nn::model::{gdn_decode, gdn_decode_backward, DecoderFilters};
use crate::nn::params::{glorot_uniform, Parameters};

/// `log_var` is clamped to this range before use.
pub const LOG_VAR_CLAMP: f64 = 10.0;
/// Edge logits are clamped to `±LOGIT_CLAMP` when turned into probabilities.
pub const LOGIT_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenDims {
    pub features: usize,
    pub hidden: usize,
    pub latent: usize,
    pub wavelet: usize,
}

/// Shared GCN layer `W0: d×h`, heads `W_mu, W_lv: h×z`, and the feature
/// decoder `W3: z×m`, `W4: m×m`, `W5: m×d`. `W3` doubles as the projection
/// from the latent space into the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub w0: Array2<f64>,
    pub w_mu: Array2<f64>,
    pub w_lv: Array2<f64>,
    pub w3: Array2<f64>,
    pub w4: Array2<f64>,
    pub w5: Array2<f64>,
}

impl GenParams {
    /// Encoder weights come from `enc_rng` and decoder weights from
    /// `dec_rng`, so switching the feature term off leaves the encoder
    /// initialization untouched.
    pub fn init<R: Rng + ?Sized>(dims: &GenDims, enc_rng: &mut R, dec_rng: &mut R) -> Result<Self> {
        let GenDims {
            features,
            hidden,
            latent,
            wavelet,
        } = *dims;
        if [features, hidden, latent, wavelet].contains(&0) {
            return Err(GdnError::InvalidArgument(format!("all widths must be positive: {dims:?}")));
        }
        Ok(GenParams {
            w0: glorot_uniform(features, hidden, enc_rng),
            w_mu: glorot_uniform(hidden, latent, enc_rng),
            w_lv: glorot_uniform(hidden, latent, enc_rng),
            w3: glorot_uniform(latent, wavelet, dec_rng),
            w4: glorot_uniform(wavelet, wavelet, dec_rng),
            w5: glorot_uniform(wavelet, features, dec_rng),
        })
    }

    pub fn zeros_like(&self) -> Self {
        let z = |a: &Array2<f64>| Array2::zeros(a.dim());
        GenParams {
            w0: z(&self.w0),
            w_mu: z(&self.w_mu),
            w_lv: z(&self.w_lv),
            w3: z(&self.w3),
            w4: z(&self.w4),
            w5: z(&self.w5),
        }
    }
}

impl Parameters for GenParams {
    fn names(&self) -> Vec<&'static str> {
        vec!["W0", "W_mu", "W_lv", "W3", "W4", "W5"]
    }

    fn tensors(&self) -> Vec<&Array2<f64>> {
        vec![&self.w0, &self.w_mu, &self.w_lv, &self.w3, &self.w4, &self.w5]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        vec![
            &mut self.w0,
            &mut self.w_mu,
            &mut self.w_lv,
            &mut self.w3,
            &mut self.w4,
            &mut self.w5,
        ]
    }
}

/// Encoder outputs plus the intermediates needed for the backward pass.
#[derive(Debug, Clone)]
pub struct LatentState {
    pub mu: Array2<f64>,
    /// Clamped log-variance.
    pub log_var: Array2<f64>,
    pub eta: Array2<f64>,
    pub z: Array2<f64>,
    px: Array2<f64>,
    pre_h: Array2<f64>,
    ph: Array2<f64>,
    log_var_raw: Array2<f64>,
}

/// Standard-normal noise for the reparameterization.
pub fn sample_eta<R: Rng + ?Sized>(n: usize, latent: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, latent), || StandardNormal.sample(rng))
}

/// `H = lrelu(P X W0)`, `mu = P H W_mu`, `log_var = clamp(P H W_lv)` and
/// `Z = mu + exp(log_var / 2) ⊙ eta`.
pub fn variational_encode(
    op: &LaplacianOperator,
    x: ArrayView2<f64>,
    params: &GenParams,
    eta: Array2<f64>,
    slope: f64,
) -> Result<LatentState> {
    if x.ncols() != params.w0.nrows() {
        return Err(GdnError::shape("variational_encode features", params.w0.nrows(), x.ncols()));
    }
    if eta.dim() != (x.nrows(), params.w_mu.ncols()) {
        return Err(GdnError::shape("variational_encode noise", (x.nrows(), params.w_mu.ncols()), eta.dim()));
    }
    let px = op.propagate(x)?;
    let pre_h = px.dot(&params.w0);
    let h = leaky_relu(pre_h.view(), slope);
    let ph = op.propagate(h.view())?;
    let mu = ph.dot(&params.w_mu);
    let log_var_raw = ph.dot(&params.w_lv);
    let log_var = log_var_raw.mapv(|v| v.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP));
    let mut z = mu.clone();
    Zip::from(&mut z)
        .and(&log_var)
        .and(&eta)
        .for_each(|z, &lv, &e| *z += (0.5 * lv).exp() * e);
    Ok(LatentState {
        mu,
        log_var,
        eta,
        z,
        px,
        pre_h,
        ph,
        log_var_raw,
    })
}

pub fn logistic(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// `p(A_ij = 1) = logistic(clamp(z_i · z_j))`, computed for one pair.
pub fn edge_probability(z: ArrayView2<f64>, i: usize, j: usize) -> f64 {
    let s = z.row(i).dot(&z.row(j));
    logistic(s.clamp(-LOGIT_CLAMP, LOGIT_CLAMP))
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// KL divergence to the standard normal: `Σ_ik ½(mu² + e^lv − 1 − lv) / n²`
/// (the per-node mean, scaled by `1/n` to match the per-pair edge term).
pub fn kl_divergence(mu: ArrayView2<f64>, log_var: ArrayView2<f64>) -> f64 {
    let n = mu.nrows() as f64;
    let s: f64 = Zip::from(mu)
        .and(log_var)
        .fold(0.0, |acc, &m, &lv| acc + 0.5 * (m * m + lv.exp() - 1.0 - lv));
    s / (n * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub edge: f64,
    pub kl: f64,
    pub feature: f64,
    pub total: f64,
}

/// Weighted edge cross-entropy over ordered pairs `i ≠ j`, averaged over
/// pairs, with positives weighted by `non-edges / edges`. Returns the loss
/// and `∂loss/∂Z`.
fn edge_loss(op: &LaplacianOperator, z: &Array2<f64>) -> (f64, Array2<f64>) {
    let g = op.graph();
    let n = g.n_nodes();
    let pairs = (n * (n - 1)) as f64;
    let m = g.n_edges() as f64;
    let pos_weight = if m > 0.0 { (n as f64 * (n as f64 - 1.0) / 2.0 - m) / m } else { 1.0 };
    let mut loss = 0.0;
    let mut dz = Array2::zeros(z.dim());
    for i in 0..n {
        for j in i + 1..n {
            let s = z.row(i).dot(&z.row(j));
            let (l, ds) = if g.has_edge(i, j) {
                (pos_weight * softplus(-s), -pos_weight * logistic(-s))
            } else {
                (softplus(s), logistic(s))
            };
            // (i, j) and (j, i) carry the same logit
            loss += 2.0 * l;
            let coeff = 2.0 * ds / pairs;
            let zj = z.row(j).to_owned();
            let zi = z.row(i).to_owned();
            dz.row_mut(i).scaled_add(coeff, &zj);
            dz.row_mut(j).scaled_add(coeff, &zi);
        }
    }
    (loss / pairs, dz)
}

/// Full objective `edge BCE + KL + w · feature MSE` and its exact gradient
/// for fixed `eta`. With `feature_weight == 0` the decoder is skipped and
/// its gradients are zero.
pub fn generation_loss(
    op: &LaplacianOperator,
    x: ArrayView2<f64>,
    latent: &LatentState,
    params: &GenParams,
    filters: &DecoderFilters,
    feature_weight: f64,
    slope: f64,
) -> Result<(LossParts, GenParams)> {
    let n = x.nrows();
    if n < 2 {
        return Err(GdnError::InvalidArgument("graphs need at least two nodes".into()));
    }
    let mut grads = params.zeros_like();
    let (edge, mut dz) = edge_loss(op, &latent.z);
    let kl = kl_divergence(latent.mu.view(), latent.log_var.view());

    let mut feature = 0.0;
    if feature_weight != 0.0 {
        let (recon, cache) = gdn_decode(op, filters, latent.z.view(), &params.w3, &params.w4, &params.w5, slope)?;
        let count = recon.len() as f64;
        let diff = &recon - &x;
        feature = diff.iter().map(|d| d * d).sum::<f64>() / count;
        let d_out = diff.mapv(|d| feature_weight * 2.0 * d / count);
        let dg = gdn_decode_backward(op, filters, &cache, &params.w3, &params.w4, &params.w5, slope, d_out.view())?;
        grads.w3 = dg.w3;
        grads.w4 = dg.w4;
        grads.w5 = dg.w5;
        dz += &dg.input;
    }

    let nn = (n * n) as f64;
    let mut d_mu = dz.clone();
    d_mu.zip_mut_with(&latent.mu, |d, &m| *d += m / nn);
    let mut d_lv = Array2::zeros(dz.dim());
    Zip::from(&mut d_lv)
        .and(&dz)
        .and(&latent.log_var)
        .and(&latent.log_var_raw)
        .and(&latent.eta)
        .for_each(|d, &g, &lv, &raw, &e| {
            if raw.abs() <= LOG_VAR_CLAMP {
                *d = g * e * 0.5 * (0.5 * lv).exp() + 0.5 * (lv.exp() - 1.0) / nn;
            }
        });
    grads.w_mu = latent.ph.t().dot(&d_mu);
    grads.w_lv = latent.ph.t().dot(&d_lv);
    let d_ph = d_mu.dot(&params.w_mu.t()) + d_lv.dot(&params.w_lv.t());
    let d_h = op.propagate_transpose(d_ph.view())?;
    let d_pre = leaky_relu_backward(d_h.view(), latent.pre_h.view(), slope);
    grads.w0 = latent.px.t().dot(&d_pre);

    let total = edge + kl + feature_weight * feature;
    Ok((
        LossParts {
            edge,
            kl,
            feature,
            total,
        },
        grads,
    ))
}
