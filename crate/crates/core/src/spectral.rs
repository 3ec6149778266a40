//! Polynomial spectral filters and the dense eigendecomposition oracle.
//!
//! A filter `p(L) = Σ c_k L^k` is applied through the recurrence
//! `Y_0 = X, Y_{k+1} = L Y_k`, so its cost is `O(K · nnz · d)` and no dense
//! `n × n` matrix is ever formed. The eigen-oracle path computes
//! `U diag(g(λ)) Uᵀ X` explicitly and exists to check the former on small
//! graphs and to produce graph-Fourier coefficients for plotting.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::laplacian::{LaplacianOperator, Normalization};

/// Default ceiling on node count for the dense eigen-oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 2048;

/// `|1 - λ|` below this is treated as the pole of the exact inverse kernel.
pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterLabel {
    Inverse,
    Heat,
    InverseHeat,
    Custom,
}

/// `p(λ) = Σ_k coeffs[k] λ^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFilter {
    coeffs: Vec<f64>,
    label: FilterLabel,
    scale: Option<f64>,
}

impl PolynomialFilter {
    pub fn custom(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a filter needs at least one coefficient");
        PolynomialFilter {
            coeffs,
            label: FilterLabel::Custom,
            scale: None,
        }
    }

    pub fn identity() -> Self {
        Self::custom(vec![1.0])
    }

    /// `1 - λ`, the spectral response of GCN propagation.
    pub fn gcn_propagation() -> Self {
        Self::custom(vec![1.0, -1.0])
    }

    /// Truncated Maclaurin series of `1 / (1 - λ)`: all coefficients 1.
    pub fn maclaurin_inverse(order: usize) -> Self {
        PolynomialFilter {
            coeffs: vec![1.0; order + 1],
            label: FilterLabel::Inverse,
            scale: None,
        }
    }

    /// Truncated heat kernel `e^{-sλ}` (or `e^{sλ}` when `inverse`):
    /// `c_k = (∓s)^k / k!`.
    pub fn heat(scale: f64, order: usize, inverse: bool) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GdnError::InvalidArgument(format!(
                "heat kernel scale must be positive, got {scale}"
            )));
        }
        let sign = if inverse { 1.0 } else { -1.0 };
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut c = 1.0;
        coeffs.push(c);
        for k in 1..=order {
            c *= sign * scale / k as f64;
            coeffs.push(c);
        }
        Ok(PolynomialFilter {
            coeffs,
            label: if inverse {
                FilterLabel::InverseHeat
            } else {
                FilterLabel::Heat
            },
            scale: Some(scale),
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn label(&self) -> FilterLabel {
        self.label
    }

    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation of `p(λ)`.
    pub fn eval(&self, lambda: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
    }

    /// `p(L) X` by iterated sparse products.
    pub fn apply(&self, op: &LaplacianOperator, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.apply_impl(op, x, false)
    }

    /// `p(L)ᵀ X = p(Lᵀ) X`; equal to [`apply`](Self::apply) for symmetric `L`.
    pub fn apply_transpose(&self, op: &LaplacianOperator, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.apply_impl(op, x, true)
    }

    fn apply_impl(
        &self,
        op: &LaplacianOperator,
        x: ArrayView2<f64>,
        transpose: bool,
    ) -> Result<Array2<f64>> {
        if x.nrows() != op.n_nodes() {
            return Err(GdnError::shape("apply_filter", op.n_nodes(), x.nrows()));
        }
        let mut acc = x.to_owned();
        acc *= self.coeffs[0];
        if self.coeffs.len() == 1 {
            return Ok(acc);
        }
        let mut y = x.to_owned();
        for &c in &self.coeffs[1..] {
            y = if transpose {
                op.apply_transpose(y.view())?
            } else {
                op.apply(y.view())?
            };
            if c != 0.0 {
                acc.scaled_add(c, &y);
            }
        }
        Ok(acc)
    }
}

/// Scalar spectral kernels used on the oracle path.
pub mod kernels {
    use super::SINGULAR_TOL;

    /// `1 / (1 - λ)`, returning `+∞` within [`SINGULAR_TOL`] of the pole.
    pub fn exact_inverse(lambda: f64) -> f64 {
        let d = 1.0 - lambda;
        if d.abs() < SINGULAR_TOL {
            f64::INFINITY
        } else {
            1.0 / d
        }
    }

    pub fn gcn(lambda: f64) -> f64 {
        1.0 - lambda
    }

    pub fn heat(scale: f64) -> impl Fn(f64) -> f64 {
        move |lambda| (-scale * lambda).exp()
    }

    pub fn inverse_heat(scale: f64) -> impl Fn(f64) -> f64 {
        move |lambda| (scale * lambda).exp()
    }
}

/// Eigenpairs of a symmetric Laplacian, eigenvalues ascending and
/// eigenvectors as orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(kernel(λ)) Uᵀ X`. Fails on the first eigenvalue where the
    /// kernel is not finite.
    pub fn filter_apply<F>(&self, kernel: F, x: ArrayView2<f64>) -> Result<Array2<f64>>
    where
        F: Fn(f64) -> f64,
    {
        if x.nrows() != self.n() {
            return Err(GdnError::shape("exact_filter_apply", self.n(), x.nrows()));
        }
        let gains = self.kernel_values(&kernel)?;
        let u = &self.eigenvectors;
        let mut coeffs = u.t().dot(&x);
        for (mut row, g) in coeffs.axis_iter_mut(Axis(0)).zip(gains.iter()) {
            row *= *g;
        }
        Ok(u.dot(&coeffs))
    }

    /// `kernel(λ_i)` for every eigenvalue, or the singular eigenvalue.
    pub fn kernel_values<F>(&self, kernel: F) -> Result<Array1<f64>>
    where
        F: Fn(f64) -> f64,
    {
        self.eigenvalues
            .iter()
            .map(|&lambda| {
                let v = kernel(lambda);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(GdnError::SingularKernel { lambda })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Array1::from)
    }

    /// Graph Fourier transform `Uᵀ x`.
    pub fn fourier(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.n() {
            return Err(GdnError::shape("graph_fourier", self.n(), x.len()));
        }
        Ok(self.eigenvectors.t().dot(&x))
    }

    /// Fraction of total spectral energy of the columns of `x` carried by
    /// eigenvalues strictly above `cutoff`. Zero signals give 0.
    pub fn energy_fraction_above(&self, x: ArrayView2<f64>, cutoff: f64) -> Result<f64> {
        if x.nrows() != self.n() {
            return Err(GdnError::shape("energy_fraction_above", self.n(), x.nrows()));
        }
        let coeffs = self.eigenvectors.t().dot(&x);
        let mut high = 0.0;
        let mut total = 0.0;
        for (row, &lambda) in coeffs.axis_iter(Axis(0)).zip(self.eigenvalues.iter()) {
            let e: f64 = row.iter().map(|c| c * c).sum();
            total += e;
            if lambda > cutoff {
                high += e;
            }
        }
        Ok(if total > 0.0 { high / total } else { 0.0 })
    }
}

/// Dense symmetric eigendecomposition of `L` (oracle only).
pub fn eigen_decompose(op: &LaplacianOperator, limit: usize) -> Result<EigenSystem> {
    let n = op.n_nodes();
    if n > limit {
        return Err(GdnError::OracleLimit { n_nodes: n, limit });
    }
    if op.kind() != Normalization::Symmetric {
        return Err(GdnError::InvalidArgument(
            "eigen-oracle requires the symmetric normalization".into(),
        ));
    }
    let dense = op.to_dense();
    Ok(symmetric_eigen(&dense))
}

/// Eigendecomposition of a dense symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &Array2<f64>) -> EigenSystem {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]]));
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = Array1::from_iter(order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = Array2::from_shape_fn((n, n), |(i, c)| eig.eigenvectors[(i, order[c])]);
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

/// `(λ_i, (Uᵀx)_i)` rows as CSV with header `lambda,coefficient`.
pub fn spectrum_csv(es: &EigenSystem, x: ArrayView1<f64>) -> Result<String> {
    let coeffs = es.fourier(x)?;
    let mut out = String::from("lambda,coefficient\n");
    for (l, c) in es.eigenvalues.iter().zip(coeffs.iter()) {
        out.push_str(&format!("{l},{c}\n"));
    }
    Ok(out)
}

/// Relative Frobenius distance `‖a - b‖ / max(‖b‖, tiny)`.
pub fn relative_frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let diff: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = b.iter().map(|y| y * y).sum();
    diff.sqrt() / norm.sqrt().max(f64::MIN_POSITIVE)
}
