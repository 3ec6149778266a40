//! Noise amplification of inverse graph filters.
//!
//! The model: a fixed signal `x` is smoothed and passed through an
//! activation, `h = σ(P x)` with `P = I - L`, then observed with white noise
//! `ĥ = h + ε`, `ε ~ N(0, s² I)`. Recovery applies `σ⁻¹` and a spectral
//! kernel `k`: `x' = U k(Λ) Uᵀ σ⁻¹(ĥ)`. For the identity activation the
//! per-coordinate variance ratio `mean_i Var(x'_i) / s²` equals
//! `Σ_i k(λ_i)² / N`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::graph::SparseGraph;
use crate::laplacian::LaplacianOperator;
use crate::nn::activation::LEAKY_SLOPE;
use crate::rng;
use crate::spectral::{eigen_decompose, kernels, EigenSystem, PolynomialFilter, DEFAULT_ORACLE_LIMIT};

/// Trials per parallel chunk; chunk statistics are merged in chunk order.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    /// `x` for `x ≥ 0`, `slope · x` otherwise.
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::LeakyRelu(a) => {
                if x >= 0.0 {
                    x
                } else {
                    a * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// `σ⁻¹(y)`, or `None` outside the range of `σ`.
    pub fn inverse(self, y: f64) -> Option<f64> {
        match self {
            Activation::Identity => Some(y),
            Activation::LeakyRelu(a) => Some(if y >= 0.0 { y } else { y / a }),
            Activation::Tanh => (y > -1.0 && y < 1.0).then(|| y.atanh()),
            Activation::Sigmoid => (y > 0.0 && y < 1.0).then(|| (y / (1.0 - y)).ln()),
        }
    }

    /// `(σ⁻¹)'(y)` on the range of `σ`.
    pub fn inverse_derivative(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::LeakyRelu(a) => {
                if y >= 0.0 {
                    1.0
                } else {
                    1.0 / a
                }
            }
            Activation::Tanh => 1.0 / (1.0 - y * y),
            Activation::Sigmoid => 1.0 / (y * (1.0 - y)),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => write!(f, "identity"),
            Activation::LeakyRelu(a) => write!(f, "leaky_relu:{a}"),
            Activation::Tanh => write!(f, "tanh"),
            Activation::Sigmoid => write!(f, "sigmoid"),
        }
    }
}

impl FromStr for Activation {
    type Err = GdnError;

    /// `identity`, `tanh`, `sigmoid`, `leaky_relu` or `leaky_relu:<slope>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "leaky_relu" => Ok(Activation::LeakyRelu(LEAKY_SLOPE)),
            _ => match s.strip_prefix("leaky_relu:").map(str::parse::<f64>) {
                Some(Ok(a)) if a > 0.0 && a.is_finite() => Ok(Activation::LeakyRelu(a)),
                _ => Err(GdnError::InvalidArgument(format!("unknown activation '{s}'"))),
            },
        }
    }
}

/// Recovery kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    /// `1 / (1 - λ)`.
    ExactInverse,
    /// `Σ_{k ≤ K} λ^k`.
    TruncatedInverse(usize),
    Identity,
}

impl KernelSpec {
    pub fn eval(self, lambda: f64) -> f64 {
        match self {
            KernelSpec::ExactInverse => kernels::exact_inverse(lambda),
            KernelSpec::TruncatedInverse(k) => PolynomialFilter::maclaurin_inverse(k).eval(lambda),
            KernelSpec::Identity => 1.0,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::ExactInverse => write!(f, "exact-inverse"),
            KernelSpec::TruncatedInverse(k) => write!(f, "truncated-inverse:{k}"),
            KernelSpec::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = GdnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-inverse" => Ok(KernelSpec::ExactInverse),
            "identity" => Ok(KernelSpec::Identity),
            _ => match s.strip_prefix("truncated-inverse:").map(str::parse::<usize>) {
                Some(Ok(k)) => Ok(KernelSpec::TruncatedInverse(k)),
                _ => Err(GdnError::InvalidArgument(format!("unknown kernel '{s}'"))),
            },
        }
    }
}

/// `Σ_i k(λ_i)² / N`; fails naming the first eigenvalue where `k` is singular.
pub fn amplification_analytic<F: Fn(f64) -> f64>(es: &EigenSystem, kernel: F) -> Result<f64> {
    let k = es.kernel_values(kernel)?;
    Ok(k.iter().map(|v| v * v).sum::<f64>() / es.n() as f64)
}

/// How the fixed base signal `x` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseSignal {
    /// One standard-normal draw per node from the seed's signal stream.
    #[default]
    Gaussian,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub sigma: f64,
    pub trials: usize,
    pub activation: Activation,
    pub seed: u64,
    #[serde(default)]
    pub base: BaseSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub ratio: f64,
    pub accepted: usize,
    pub rejected: usize,
}

/// Per-coordinate running mean and sum of squared deviations.
#[derive(Clone)]
struct Moments {
    count: usize,
    mean: Array1<f64>,
    m2: Array1<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            count: 0,
            mean: Array1::zeros(n),
            m2: Array1::zeros(n),
        }
    }

    fn push(&mut self, x: &Array1<f64>) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x.iter()) {
            let d = v - *m;
            *m += d / c;
            *s += d * (v - *m);
        }
    }

    /// Chan et al. pairwise combination.
    fn merge(mut self, other: &Moments) -> Moments {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
            self.mean[i] += d * nb / n;
        }
        self.count += other.count;
        self
    }
}

/// Everything a simulation needs about one graph and kernel.
pub struct NoiseModel {
    /// Clean activation output `h = σ(P x)`.
    pub clean: Array1<f64>,
    /// Dense recovery matrix `U k(Λ) Uᵀ`.
    pub recovery: Array2<f64>,
    pub activation: Activation,
}

impl NoiseModel {
    pub fn new(es: &EigenSystem, kernel: KernelSpec, activation: Activation, x: &Array1<f64>) -> Result<Self> {
        let x2 = x.view().insert_axis(ndarray::Axis(1));
        let smoothed = es.filter_apply(kernels::gcn, x2)?.column(0).to_owned();
        let clean = smoothed.mapv(|v| activation.apply(v));
        let recovery = es.filter_apply(|l| kernel.eval(l), Array2::<f64>::eye(es.n()).view())?;
        Ok(NoiseModel {
            clean,
            recovery,
            activation,
        })
    }

    /// First-order (delta-method) prediction of the variance ratio:
    /// `Σ_ij R_ij² (σ⁻¹)'(h_j)² / N`.
    pub fn first_order_ratio(&self) -> f64 {
        let d2: Vec<f64> = self
            .clean
            .iter()
            .map(|&h| self.activation.inverse_derivative(h).powi(2))
            .collect();
        let n = self.clean.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.recovery[[i, j]].powi(2) * d2[j];
            }
        }
        total / n as f64
    }
}

fn base_signal(n: usize, cfg: &MonteCarloConfig) -> Array1<f64> {
    match cfg.base {
        BaseSignal::Zero => Array1::zeros(n),
        BaseSignal::Gaussian => {
            let mut r = rng::stream(cfg.seed, rng::SIGNAL);
            Array1::from_shape_simple_fn(n, || StandardNormal.sample(&mut r))
        }
    }
}

/// Monte Carlo estimate of `mean_i Var(x'_i) / s²`. Trial `t` draws its
/// noise from its own counter-derived stream, so the estimate is the same
/// for any thread count. Trials where `σ⁻¹` is undefined are rejected and
/// counted; more than half rejected is an error.
pub fn amplification_monte_carlo(es: &EigenSystem, kernel: KernelSpec, cfg: &MonteCarloConfig) -> Result<MonteCarloResult> {
    if cfg.trials < 2 {
        return Err(GdnError::InvalidArgument("at least two trials are required".into()));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) {
        return Err(GdnError::InvalidArgument(format!("sigma must be positive, got {}", cfg.sigma)));
    }
    let n = es.n();
    let model = NoiseModel::new(es, kernel, cfg.activation, &base_signal(n, cfg))?;
    let chunks: Vec<(usize, usize)> = (0..cfg.trials)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(cfg.trials)))
        .collect();
    let parts: Vec<(Moments, usize)> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut m = Moments::new(n);
            let mut rejected = 0;
            let mut pre = Array1::zeros(n);
            'trial: for t in start..end {
                let mut r = rng::trial_stream(cfg.seed, t as u64);
                for (p, &h) in pre.iter_mut().zip(model.clean.iter()) {
                    let e: f64 = StandardNormal.sample(&mut r);
                    match cfg.activation.inverse(h + cfg.sigma * e) {
                        Some(v) => *p = v,
                        None => {
                            rejected += 1;
                            continue 'trial;
                        }
                    }
                }
                m.push(&model.recovery.dot(&pre));
            }
            (m, rejected)
        })
        .collect();
    let (moments, rejected) = parts
        .iter()
        .fold((Moments::new(n), 0), |(acc, r), (m, rej)| (acc.merge(m), r + rej));
    if 2 * rejected > cfg.trials || moments.count < 2 {
        return Err(GdnError::TooManyRejections {
            rejected,
            trials: cfg.trials,
        });
    }
    let var_mean = moments.m2.sum() / (moments.count - 1) as f64 / n as f64;
    Ok(MonteCarloResult {
        ratio: var_mean / (cfg.sigma * cfg.sigma),
        accepted: moments.count,
        rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub graph: String,
    pub kernel: String,
    pub activation: String,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub first_order: f64,
    pub trials: usize,
    pub rejected: usize,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub kernels: Vec<KernelSpec>,
    pub activations: Vec<Activation>,
    pub sigma: f64,
    pub trials: usize,
    pub seed: u64,
}

/// One report per (graph, kernel, activation). `analytic` is always the
/// identity-activation factor `Σ k(λ)² / N`; `first_order` adjusts it for
/// the activation around the clean signal.
pub fn amplification_report(
    suite: &[(String, Arc<SparseGraph>)],
    config: &SuiteConfig,
) -> Result<Vec<AmplificationReport>> {
    let mut out = Vec::new();
    for (name, g) in suite {
        let es = eigen_decompose(&LaplacianOperator::symmetric(g.clone()), DEFAULT_ORACLE_LIMIT)?;
        for &kernel in &config.kernels {
            let analytic = amplification_analytic(&es, |l| kernel.eval(l))?;
            for &activation in &config.activations {
                let mc_cfg = MonteCarloConfig {
                    sigma: config.sigma,
                    trials: config.trials,
                    activation,
                    seed: config.seed,
                    base: BaseSignal::Gaussian,
                };
                let mc = amplification_monte_carlo(&es, kernel, &mc_cfg)?;
                let model = NoiseModel::new(&es, kernel, activation, &base_signal(es.n(), &mc_cfg))?;
                out.push(AmplificationReport {
                    graph: name.clone(),
                    kernel: kernel.to_string(),
                    activation: activation.to_string(),
                    analytic,
                    monte_carlo: mc.ratio,
                    first_order: model.first_order_ratio(),
                    trials: config.trials,
                    rejected: mc.rejected,
                    sigma: config.sigma,
                    seed: config.seed,
                });
            }
        }
    }
    Ok(out)
}

pub fn amplification_csv(reports: &[AmplificationReport]) -> String {
    let mut out = String::from("graph,kernel,activation,analytic,monte_carlo,trials\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.graph, r.kernel, r.activation, r.analytic, r.monte_carlo, r.trials
        ));
    }
    out
}
