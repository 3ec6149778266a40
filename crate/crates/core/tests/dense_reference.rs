//! Dense re-implementations of both training objectives, written from the
//! model equations with explicit matrix powers. The library's sparse
//! forward passes must reproduce them, and its analytic gradients must match
//! central differences taken on the dense versions.

use std::sync::Arc;

use gdn_core::features::{generate_mask, FeatureMatrix};
use gdn_core::generation::model::{generation_loss, sample_eta, variational_encode, GenDims, GenParams};
use gdn_core::graph::SparseGraph;
use gdn_core::laplacian::LaplacianOperator;
use gdn_core::nn::model::gdn_decode;
use gdn_core::nn::{Autoencoder, DecoderKind, ModelConfig, ModelParams, Parameters};
use gdn_core::rng;
use gdn_core::spectral::{eigen_decompose, relative_frobenius};
use gdn_core::synth::erdos_renyi;
use ndarray::{concatenate, Array2, Axis};
use rand::Rng;

const SLOPE: f64 = 0.2;
const H: f64 = 1e-5;

fn dense_laplacian(g: &SparseGraph) -> Array2<f64> {
    let n = g.n_nodes();
    let mut a = Array2::<f64>::zeros((n, n));
    for &(u, v) in g.edges() {
        a[[u, v]] = 1.0;
        a[[v, u]] = 1.0;
    }
    let deg: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        if deg[i] > 0.0 {
            l[[i, i]] = 1.0;
        }
        for j in 0..n {
            if a[[i, j]] != 0.0 {
                l[[i, j]] -= 1.0 / (deg[i] * deg[j]).sqrt();
            }
        }
    }
    l
}

fn matrix_poly(l: &Array2<f64>, coeffs: &[f64]) -> Array2<f64> {
    let n = l.nrows();
    let mut power = Array2::eye(n);
    let mut out = Array2::zeros((n, n));
    for &c in coeffs {
        out = out + &power * c;
        power = power.dot(l);
    }
    out
}

fn series(order: usize, ratio: f64) -> Vec<f64> {
    // c_k = ratio^k / k!
    let mut out = vec![1.0];
    for k in 1..=order {
        let prev = out[k - 1];
        out.push(prev * ratio / k as f64);
    }
    out
}

/// `(inverse, analysis, synthesis)` coefficient lists of each decoder.
fn decoder_coeffs(kind: DecoderKind, order: usize) -> [Vec<f64>; 3] {
    let ones = vec![1.0; order + 1];
    match kind {
        DecoderKind::Gdn => [ones, series(order, 1.0), series(order, -1.0)],
        DecoderKind::InverseOnly => [ones, vec![1.0], vec![1.0]],
        DecoderKind::GcnDecoder => [vec![1.0, -1.0], vec![1.0, -1.0], vec![1.0, -1.0]],
        DecoderKind::Gala => [vec![1.0, 1.0], vec![1.0], vec![1.0]],
    }
}

fn lrelu(x: &Array2<f64>, slope: f64) -> Array2<f64> {
    x.mapv(|v| if v >= 0.0 { v } else { slope * v })
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

struct DenseDecoder {
    f: [Array2<f64>; 3],
}

impl DenseDecoder {
    fn new(l: &Array2<f64>, kind: DecoderKind) -> Self {
        let [a, b, c] = decoder_coeffs(kind, 3);
        DenseDecoder {
            f: [matrix_poly(l, &a), matrix_poly(l, &b), matrix_poly(l, &c)],
        }
    }

    /// Returns the output and the pre-ReLU wavelet activations.
    fn decode(&self, h: &Array2<f64>, w3: &Array2<f64>, w4: &Array2<f64>, w5: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let m = lrelu(&self.f[0].dot(h).dot(w3), SLOPE);
        let z = self.f[1].dot(&m).dot(w4);
        (self.f[2].dot(&relu(&z)).dot(w5), z)
    }
}

fn masked_mse(x: &Array2<f64>, pred: &Array2<f64>, mask: &Array2<bool>) -> f64 {
    let mut s = 0.0;
    let mut k = 0;
    for ((a, b), &m) in x.iter().zip(pred.iter()).zip(mask.iter()) {
        if m {
            s += (a - b) * (a - b);
            k += 1;
        }
    }
    s / k as f64
}

fn graph(n: usize, seed: u64) -> Arc<SparseGraph> {
    Arc::new(erdos_renyi(n, 3.0 / n as f64, &mut rng::stream(seed, rng::DATA)).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Max relative error between `analytic` and central differences of `loss`.
fn fd_check<P: Parameters + Clone>(params: &P, analytic: &P, loss: impl Fn(&P) -> f64) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    let mut work = params.clone();
    for (t, name) in params.names().into_iter().enumerate() {
        let grad = analytic.tensors()[t].clone();
        let cols = grad.ncols();
        let mut worst: f64 = 0.0;
        for idx in 0..grad.len() {
            let (r, c) = (idx / cols, idx % cols);
            let orig = work.tensors()[t][[r, c]];
            work.tensors_mut()[t][[r, c]] = orig + H;
            let up = loss(&work);
            work.tensors_mut()[t][[r, c]] = orig - H;
            let down = loss(&work);
            work.tensors_mut()[t][[r, c]] = orig;
            worst = worst.max(rel(grad[[r, c]], (up - down) / (2.0 * H)));
        }
        out.push((name, worst));
    }
    out
}

#[test]
fn autoencoder_matches_dense_reference_and_gradients() {
    let n = 16;
    for kind in DecoderKind::ALL {
        for seed in 0..3 {
            let g = graph(n, seed);
            let l = dense_laplacian(&g);
            let p = Array2::<f64>::eye(n) - &l;
            let mut r = rng::stream(seed, rng::SIGNAL);
            let feats = FeatureMatrix::dense(Array2::from_shape_simple_fn((n, 5), || r.random::<f64>()));
            let mf = generate_mask(&feats, 0.2, &mut rng::stream(seed, rng::MASK)).unwrap();
            let x_in = mf.observed_input();
            let model = Autoencoder::new(g.clone(), 5, ModelConfig { decoder: kind, ..ModelConfig::new(6, 4) }).unwrap();
            let params = ModelParams::init(model.dims(), &mut rng::stream(seed, rng::PARAM_INIT)).unwrap();
            let dec = DenseDecoder::new(&l, kind);

            let dense_loss = |w: &ModelParams| {
                let h1 = lrelu(&p.dot(&x_in).dot(&w.w1), SLOPE);
                let h2 = lrelu(&p.dot(&h1).dot(&w.w2), SLOPE);
                let h = concatenate![Axis(1), h1, h2];
                let (out, _) = dec.decode(&h, &w.w3, &w.w4, &w.w5);
                masked_mse(&mf.x, &out, &mf.train_mask)
            };

            let lib = model.loss(&params, x_in.view(), mf.x.view(), mf.train_mask.view()).unwrap();
            let reference = dense_loss(&params);
            assert!(rel(lib, reference) <= 1e-10, "{kind:?}/{seed}: {lib} vs {reference}");

            let (_, grads) = model
                .loss_and_grads(&params, x_in.view(), mf.x.view(), mf.train_mask.view(), None)
                .unwrap();
            for (name, err) in fd_check(&params, &grads, dense_loss) {
                assert!(err <= 1e-4, "{kind:?}/{seed} {name}: {err}");
            }
        }
    }
}

#[test]
fn instances_exercise_both_relu_regions() {
    let n = 16;
    let g = graph(n, 0);
    let l = dense_laplacian(&g);
    let p = Array2::<f64>::eye(n) - &l;
    let x = Array2::from_shape_fn((n, 5), |(i, j)| ((i * 5 + j) as f64 * 0.37).sin());
    let model = Autoencoder::new(g, 5, ModelConfig::new(6, 4)).unwrap();
    let w = ModelParams::init(model.dims(), &mut rng::stream(0, rng::PARAM_INIT)).unwrap();
    let h1 = lrelu(&p.dot(&x).dot(&w.w1), SLOPE);
    let h2 = lrelu(&p.dot(&h1).dot(&w.w2), SLOPE);
    let h = concatenate![Axis(1), h1, h2];
    let (_, z) = DenseDecoder::new(&l, DecoderKind::Gdn).decode(&h, &w.w3, &w.w4, &w.w5);
    assert!(z.iter().any(|&v| v > 0.0) && z.iter().any(|&v| v < 0.0));
}

#[test]
fn generation_objective_matches_dense_reference_and_gradients() {
    let labels = 4;
    for (n, seed) in [(12, 0u64), (16, 1), (16, 2)] {
        let g = graph(n, seed);
        let l = dense_laplacian(&g);
        let p = Array2::<f64>::eye(n) - &l;
        let op = LaplacianOperator::symmetric(g.clone());
        let x = Array2::from_shape_fn((n, labels), |(i, j)| if (i * 3 + 1) % labels == j { 1.0 } else { 0.0 });
        let dims = GenDims { features: labels, hidden: 6, latent: 3, wavelet: 5 };
        let params = GenParams::init(
            &dims,
            &mut rng::stream(seed, rng::PARAM_INIT),
            &mut rng::stream(seed, rng::DECODER_INIT),
        )
        .unwrap();
        let eta = sample_eta(n, dims.latent, &mut rng::stream(seed, rng::REPARAM));
        let dec = DenseDecoder::new(&l, DecoderKind::Gdn);
        let pairs = (n * (n - 1)) as f64;
        let m = g.n_edges() as f64;
        let pos_weight = (pairs / 2.0 - m) / m;

        let dense_loss = |w: &GenParams| {
            let h = lrelu(&p.dot(&x).dot(&w.w0), SLOPE);
            let ph = p.dot(&h);
            let mu = ph.dot(&w.w_mu);
            let lv = ph.dot(&w.w_lv).mapv(|v| v.clamp(-10.0, 10.0));
            let z = &mu + &(lv.mapv(|v| (0.5 * v).exp()) * &eta);
            let mut edge = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let s = z.row(i).dot(&z.row(j));
                    let prob = 1.0 / (1.0 + (-s).exp());
                    edge -= if g.has_edge(i, j) { pos_weight * prob.ln() } else { (1.0 - prob).ln() };
                }
            }
            edge /= pairs;
            let kl: f64 = mu
                .iter()
                .zip(lv.iter())
                .map(|(m, v)| 0.5 * (m * m + v.exp() - 1.0 - v))
                .sum::<f64>()
                / (n * n) as f64;
            let (out, _) = dec.decode(&z, &w.w3, &w.w4, &w.w5);
            let feature = (&out - &x).mapv(|d| d * d).mean().unwrap();
            edge + kl + feature
        };

        let lib_loss = |w: &GenParams| {
            let latent = variational_encode(&op, x.view(), w, eta.clone(), SLOPE).unwrap();
            let filters = DecoderKind::Gdn.filters(3, 1.0).unwrap();
            generation_loss(&op, x.view(), &latent, w, &filters, 1.0, SLOPE).unwrap()
        };
        let (parts, grads) = lib_loss(&params);
        let reference = dense_loss(&params);
        assert!(rel(parts.total, reference) <= 1e-10, "n={n}: {} vs {reference}", parts.total);
        for (name, err) in fd_check(&params, &grads, dense_loss) {
            assert!(err <= 1e-4, "n={n} {name}: {err}");
        }
    }
}

#[test]
fn linear_decoder_composition_matches_eigen_oracle() {
    // Identity activations in the inverse stage (slope 1) and identity
    // weights: X' = Ψ ReLU(Ψ⁻¹ p(L) H).
    for seed in 0..5 {
        let n = 40;
        let g = graph(n, seed);
        let op = LaplacianOperator::symmetric(g);
        let es = eigen_decompose(&op, 64).unwrap();
        let mut r = rng::stream(seed, rng::SIGNAL);
        let h = Array2::from_shape_simple_fn((n, 3), || r.random_range(-1.0..1.0));
        let eye = Array2::<f64>::eye(3);
        let filters = DecoderKind::Gdn.filters(3, 1.0).unwrap();
        let (out, _) = gdn_decode(&op, &filters, h.view(), &eye, &eye, &eye, 1.0).unwrap();

        let inv = series(3, 1.0);
        let fwd = series(3, -1.0);
        let poly = |c: &[f64]| {
            let c = c.to_vec();
            move |lam: f64| c.iter().enumerate().map(|(k, ck)| ck * lam.powi(k as i32)).sum::<f64>()
        };
        let ones = [1.0; 4];
        let m = es.filter_apply(poly(&ones), h.view()).unwrap();
        let z = es.filter_apply(poly(&inv), m.view()).unwrap();
        let expect = es.filter_apply(poly(&fwd), relu(&z).view()).unwrap();
        let err = relative_frobenius(&out, &expect);
        assert!(err <= 1e-10, "seed {seed}: {err}");
    }
}
