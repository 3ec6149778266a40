//! Forward and reverse passes of the GCN encoder and the deconvolution decoder.
//!
//! Encoder: `H1 = σ(P X W1)`, `H2 = σ(P H1 W2)`, `H = [H1 | H2]` with
//! `P = I - L` and σ Leaky ReLU.
//!
//! Decoder: `M = σ(f_inv(L) H W3)`, `Z = f_analysis(L) M W4`,
//! `X' = f_synthesis(L) ReLU(Z) W5`. For the deconvolution decoder the three
//! filters are the truncated inverse `Σ L^k`, `Ψ_s⁻¹` and `Ψ_s`; the ablation
//! decoders swap in other polynomials with the same weight shapes.
//!
//! Filters commute with right multiplication by weights, so they are applied
//! before the weight product and the filtered activations are cached for the
//! weight gradients. Every decoder filter is a polynomial in the symmetric
//! `L`, hence self-adjoint, and the reverse pass reuses the forward filter.

use std::sync::Arc;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::activation::{leaky_relu, leaky_relu_backward, relu, relu_backward, LEAKY_SLOPE};
use super::loss::{masked_mse, masked_mse_grad};
use super::params::{ModelDims, ModelParams};
use crate::error::{GdnError, Result};
use crate::graph::SparseGraph;
use crate::laplacian::{LaplacianOperator, Normalization};
use crate::spectral::PolynomialFilter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Truncated inverse filter followed by wavelet-domain de-noising.
    Gdn,
    /// Inverse filter only; the wavelet transforms become identities.
    InverseOnly,
    /// GCN propagation `1 - λ` in every filter slot.
    GcnDecoder,
    /// First-order inverse `1 + λ` (Laplacian sharpening), no wavelet stage.
    Gala,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] = [
        DecoderKind::Gdn,
        DecoderKind::InverseOnly,
        DecoderKind::GcnDecoder,
        DecoderKind::Gala,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Gdn => "gdn",
            DecoderKind::InverseOnly => "inverse_only",
            DecoderKind::GcnDecoder => "gcn_decoder",
            DecoderKind::Gala => "gala",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn filters(self, order: usize, scale: f64) -> Result<DecoderFilters> {
        Ok(match self {
            DecoderKind::Gdn => DecoderFilters {
                inverse: PolynomialFilter::maclaurin_inverse(order),
                analysis: PolynomialFilter::heat(scale, order, true)?,
                synthesis: PolynomialFilter::heat(scale, order, false)?,
            },
            DecoderKind::InverseOnly => DecoderFilters {
                inverse: PolynomialFilter::maclaurin_inverse(order),
                analysis: PolynomialFilter::identity(),
                synthesis: PolynomialFilter::identity(),
            },
            DecoderKind::GcnDecoder => DecoderFilters {
                inverse: PolynomialFilter::gcn_propagation(),
                analysis: PolynomialFilter::gcn_propagation(),
                synthesis: PolynomialFilter::gcn_propagation(),
            },
            DecoderKind::Gala => DecoderFilters {
                inverse: PolynomialFilter::maclaurin_inverse(1),
                analysis: PolynomialFilter::identity(),
                synthesis: PolynomialFilter::identity(),
            },
        })
    }
}

/// The three spectral filters of a decoder: before `W3`, before `W4`, before `W5`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderFilters {
    pub inverse: PolynomialFilter,
    pub analysis: PolynomialFilter,
    pub synthesis: PolynomialFilter,
}

/// Architecture and filter settings of the autoencoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden1: usize,
    pub hidden2: usize,
    /// Width of the wavelet stage; defaults to the decoder input width.
    #[serde(default)]
    pub wavelet: Option<usize>,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_slope")]
    pub leaky_slope: f64,
    #[serde(default = "default_true")]
    pub stack: bool,
    #[serde(default)]
    pub encoder_norm: Normalization,
    #[serde(default)]
    pub self_loops: bool,
}

fn default_decoder() -> DecoderKind {
    DecoderKind::Gdn
}
fn default_order() -> usize {
    3
}
fn default_scale() -> f64 {
    1.0
}
fn default_slope() -> f64 {
    LEAKY_SLOPE
}
fn default_true() -> bool {
    true
}

impl ModelConfig {
    pub fn new(hidden1: usize, hidden2: usize) -> Self {
        ModelConfig {
            hidden1,
            hidden2,
            wavelet: None,
            decoder: DecoderKind::Gdn,
            order: 3,
            scale: 1.0,
            leaky_slope: LEAKY_SLOPE,
            stack: true,
            encoder_norm: Normalization::Symmetric,
            self_loops: false,
        }
    }

    pub fn dims(&self, features: usize) -> ModelDims {
        let input = if self.stack {
            self.hidden1 + self.hidden2
        } else {
            self.hidden2
        };
        ModelDims {
            features,
            hidden1: self.hidden1,
            hidden2: self.hidden2,
            wavelet: self.wavelet.unwrap_or(input),
            stack: self.stack,
        }
    }
}

/// Encoder intermediates.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    /// Propagation operator actually used (after DropEdge, if any).
    pub op: LaplacianOperator,
    pub x: Array2<f64>,
    pub pre1: Array2<f64>,
    pub h1: Array2<f64>,
    pub pre2: Array2<f64>,
}

/// Decoder intermediates.
#[derive(Debug, Clone)]
pub struct DecoderCache {
    /// `f_inv(L) H`
    pub filtered_input: Array2<f64>,
    /// pre-activation of `M`
    pub pre_m: Array2<f64>,
    /// `f_analysis(L) M`
    pub filtered_m: Array2<f64>,
    /// wavelet-domain pre-ReLU `Z`
    pub z: Array2<f64>,
    /// `f_synthesis(L) ReLU(Z)`
    pub filtered_r: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub encoder: EncoderCache,
    pub decoder: DecoderCache,
    pub h: Array2<f64>,
}

fn check_dot(context: &'static str, a: &ArrayView2<f64>, b: &Array2<f64>) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(GdnError::shape(context, b.nrows(), a.ncols()));
    }
    Ok(())
}

/// Two-layer GCN encoder. Returns `[H1 | H2]` when `stack`, else `H2`.
pub fn gcn_encode(
    op: &LaplacianOperator,
    x: ArrayView2<f64>,
    w1: &Array2<f64>,
    w2: &Array2<f64>,
    slope: f64,
    stack: bool,
) -> Result<(Array2<f64>, EncoderCache)> {
    check_dot("gcn_encode W1", &x, w1)?;
    let pre1 = op.propagate(x.dot(w1).view())?;
    let h1 = leaky_relu(pre1.view(), slope);
    let pre2 = op.propagate(h1.dot(w2).view())?;
    let h2 = leaky_relu(pre2.view(), slope);
    let h = if stack {
        concatenate![Axis(1), h1, h2]
    } else {
        h2
    };
    Ok((
        h,
        EncoderCache {
            op: op.clone(),
            x: x.to_owned(),
            pre1,
            h1,
            pre2,
        },
    ))
}

/// Reverse pass of [`gcn_encode`]: returns `(∂W1, ∂W2)`.
pub fn gcn_encode_backward(
    cache: &EncoderCache,
    w2: &Array2<f64>,
    slope: f64,
    stack: bool,
    d_h: ArrayView2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let h1_width = cache.h1.ncols();
    let (d_h1_direct, d_h2) = if stack {
        (Some(d_h.slice(s![.., ..h1_width])), d_h.slice(s![.., h1_width..]))
    } else {
        (None, d_h)
    };
    let d_pre2 = leaky_relu_backward(d_h2, cache.pre2.view(), slope);
    let d_t2 = cache.op.propagate_transpose(d_pre2.view())?;
    let d_w2 = cache.h1.t().dot(&d_t2);
    let mut d_h1 = d_t2.dot(&w2.t());
    if let Some(direct) = d_h1_direct {
        d_h1 += &direct;
    }
    let d_pre1 = leaky_relu_backward(d_h1.view(), cache.pre1.view(), slope);
    let d_t1 = cache.op.propagate_transpose(d_pre1.view())?;
    let d_w1 = cache.x.t().dot(&d_t1);
    Ok((d_w1, d_w2))
}

/// `(f(L) a) · w`, also returning `f(L) a` for the reverse pass.
fn filter_then_dot(
    f: &PolynomialFilter,
    op: &LaplacianOperator,
    a: ArrayView2<f64>,
    w: &Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let filtered = f.apply(op, a)?;
    let out = filtered.dot(w);
    Ok((out, filtered))
}

/// Deconvolution decoder `X' = f_syn ReLU(f_ana σ(f_inv H W3) W4) W5`.
pub fn gdn_decode(
    op: &LaplacianOperator,
    filters: &DecoderFilters,
    h: ArrayView2<f64>,
    w3: &Array2<f64>,
    w4: &Array2<f64>,
    w5: &Array2<f64>,
    slope: f64,
) -> Result<(Array2<f64>, DecoderCache)> {
    check_dot("gdn_decode W3", &h, w3)?;
    if w4.nrows() != w3.ncols() || w5.nrows() != w4.ncols() {
        return Err(GdnError::shape(
            "gdn_decode W4/W5",
            (w3.ncols(), w4.ncols()),
            (w4.nrows(), w5.nrows()),
        ));
    }
    let (pre_m, filtered_input) = filter_then_dot(&filters.inverse, op, h, w3)?;
    let m = leaky_relu(pre_m.view(), slope);
    let (z, filtered_m) = filter_then_dot(&filters.analysis, op, m.view(), w4)?;
    let r = relu(z.view());
    let (out, filtered_r) = filter_then_dot(&filters.synthesis, op, r.view(), w5)?;
    Ok((
        out,
        DecoderCache {
            filtered_input,
            pre_m,
            filtered_m,
            z,
            filtered_r,
        },
    ))
}

/// Gradients of the decoder weights and of its input.
#[derive(Debug, Clone)]
pub struct DecoderGrads {
    pub w3: Array2<f64>,
    pub w4: Array2<f64>,
    pub w5: Array2<f64>,
    pub input: Array2<f64>,
}

/// Reverse pass of [`gdn_decode`] for upstream gradient `d_out = ∂L/∂X'`.
#[allow(clippy::too_many_arguments)]
pub fn gdn_decode_backward(
    op: &LaplacianOperator,
    filters: &DecoderFilters,
    cache: &DecoderCache,
    w3: &Array2<f64>,
    w4: &Array2<f64>,
    w5: &Array2<f64>,
    slope: f64,
    d_out: ArrayView2<f64>,
) -> Result<DecoderGrads> {
    let d_w5 = cache.filtered_r.t().dot(&d_out);
    let d_r = filters.synthesis.apply_transpose(op, d_out.dot(&w5.t()).view())?;
    let d_z = relu_backward(d_r.view(), cache.z.view());
    let d_w4 = cache.filtered_m.t().dot(&d_z);
    let d_m = filters.analysis.apply_transpose(op, d_z.dot(&w4.t()).view())?;
    let d_pre_m = leaky_relu_backward(d_m.view(), cache.pre_m.view(), slope);
    let d_w3 = cache.filtered_input.t().dot(&d_pre_m);
    let d_input = filters.inverse.apply_transpose(op, d_pre_m.dot(&w3.t()).view())?;
    Ok(DecoderGrads {
        w3: d_w3,
        w4: d_w4,
        w5: d_w5,
        input: d_input,
    })
}

/// The full encoder/decoder pair bound to one graph.
#[derive(Debug, Clone)]
pub struct Autoencoder {
    config: ModelConfig,
    dims: ModelDims,
    filters: DecoderFilters,
    encoder_op: LaplacianOperator,
    decoder_op: LaplacianOperator,
}

impl Autoencoder {
    pub fn new(graph: Arc<SparseGraph>, features: usize, config: ModelConfig) -> Result<Self> {
        let filters = config.decoder.filters(config.order, config.scale)?;
        let encoder_op = LaplacianOperator::new(graph.clone(), config.encoder_norm, config.self_loops);
        let decoder_op = LaplacianOperator::symmetric(graph);
        Ok(Autoencoder {
            dims: config.dims(features),
            config,
            filters,
            encoder_op,
            decoder_op,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn dims(&self) -> &ModelDims {
        &self.dims
    }

    pub fn filters(&self) -> &DecoderFilters {
        &self.filters
    }

    pub fn encoder_op(&self) -> &LaplacianOperator {
        &self.encoder_op
    }

    pub fn decoder_op(&self) -> &LaplacianOperator {
        &self.decoder_op
    }

    /// Forward pass. `encoder_graph` substitutes the encoder's graph (DropEdge
    /// in training); the decoder always uses the full graph.
    pub fn forward(
        &self,
        params: &ModelParams,
        x: ArrayView2<f64>,
        encoder_graph: Option<Arc<SparseGraph>>,
    ) -> Result<(Array2<f64>, ForwardCache)> {
        params.check_shapes(&self.dims)?;
        if x.nrows() != self.encoder_op.n_nodes() || x.ncols() != self.dims.features {
            return Err(GdnError::shape(
                "autoencoder input",
                (self.encoder_op.n_nodes(), self.dims.features),
                x.dim(),
            ));
        }
        let dropped;
        let enc_op = match encoder_graph {
            Some(g) => {
                dropped = self.encoder_op.with_graph(g);
                &dropped
            }
            None => &self.encoder_op,
        };
        let slope = self.config.leaky_slope;
        let (h, encoder) = gcn_encode(enc_op, x, &params.w1, &params.w2, slope, self.config.stack)?;
        let (out, decoder) = gdn_decode(
            &self.decoder_op,
            &self.filters,
            h.view(),
            &params.w3,
            &params.w4,
            &params.w5,
            slope,
        )?;
        Ok((out, ForwardCache { encoder, decoder, h }))
    }

    /// Exact gradients of all weights for upstream gradient `d_out`.
    pub fn backward(
        &self,
        params: &ModelParams,
        cache: &ForwardCache,
        d_out: ArrayView2<f64>,
    ) -> Result<ModelParams> {
        let slope = self.config.leaky_slope;
        let dec = gdn_decode_backward(
            &self.decoder_op,
            &self.filters,
            &cache.decoder,
            &params.w3,
            &params.w4,
            &params.w5,
            slope,
            d_out,
        )?;
        let (w1, w2) = gcn_encode_backward(
            &cache.encoder,
            &params.w2,
            slope,
            self.config.stack,
            dec.input.view(),
        )?;
        Ok(ModelParams {
            w1,
            w2,
            w3: dec.w3,
            w4: dec.w4,
            w5: dec.w5,
        })
    }

    /// Masked MSE of the reconstruction of `x_in` against `target`, with gradients.
    pub fn loss_and_grads(
        &self,
        params: &ModelParams,
        x_in: ArrayView2<f64>,
        target: ArrayView2<f64>,
        mask: ArrayView2<bool>,
        encoder_graph: Option<Arc<SparseGraph>>,
    ) -> Result<(f64, ModelParams)> {
        let (out, cache) = self.forward(params, x_in, encoder_graph)?;
        let loss = masked_mse(target, out.view(), mask)?;
        let d_out = masked_mse_grad(target, out.view(), mask)?;
        let grads = self.backward(params, &cache, d_out.view())?;
        Ok((loss, grads))
    }

    pub fn loss(
        &self,
        params: &ModelParams,
        x_in: ArrayView2<f64>,
        target: ArrayView2<f64>,
        mask: ArrayView2<bool>,
    ) -> Result<f64> {
        let (out, _) = self.forward(params, x_in, None)?;
        masked_mse(target, out.view(), mask)
    }
}
