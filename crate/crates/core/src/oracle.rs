//! Polynomial filters against the dense eigen-oracle on random graphs.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::laplacian::LaplacianOperator;
use crate::rng;
use crate::spectral::{eigen_decompose, relative_frobenius, PolynomialFilter};
use crate::synth::erdos_renyi;

pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCheck {
    pub filter: String,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub graphs: usize,
    pub max_nodes: usize,
    pub seed: u64,
    pub filters: Vec<FilterCheck>,
    pub max_rel_error: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= TOLERANCE
    }
}

/// The filters checked: inverse orders 1 and 3, heat `s = 1` orders 3 and 10
/// (forward and inverse).
pub fn standard_filters() -> Result<Vec<(String, PolynomialFilter)>> {
    let mut out = vec![
        ("inverse:1".to_string(), PolynomialFilter::maclaurin_inverse(1)),
        ("inverse:3".to_string(), PolynomialFilter::maclaurin_inverse(3)),
    ];
    for order in [3, 10] {
        out.push((format!("heat:{order}"), PolynomialFilter::heat(1.0, order, false)?));
        out.push((format!("inverse_heat:{order}"), PolynomialFilter::heat(1.0, order, true)?));
    }
    Ok(out)
}

/// `trials` Erdős–Rényi graphs with 2..=`max_nodes` nodes and 3 random
/// feature columns each; every filter applied by matvec chain and by
/// `U p(Λ) Uᵀ X`.
pub fn oracle_check(max_nodes: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    if max_nodes < 2 || trials == 0 {
        return Err(GdnError::InvalidArgument("need at least one graph of two or more nodes".into()));
    }
    let filters = standard_filters()?;
    let mut worst = vec![0.0f64; filters.len()];
    let mut r = rng::stream(seed, rng::DATA);
    for _ in 0..trials {
        let n = r.random_range(2..=max_nodes);
        let p = r.random_range(0.05..0.5);
        let g = Arc::new(erdos_renyi(n, p, &mut r)?);
        let op = LaplacianOperator::symmetric(g);
        let es = eigen_decompose(&op, max_nodes)?;
        let x = Array2::from_shape_simple_fn((n, 3), || StandardNormal.sample(&mut r));
        for (w, (_, f)) in worst.iter_mut().zip(&filters) {
            let fast = f.apply(&op, x.view())?;
            let exact = es.filter_apply(|l| f.eval(l), x.view())?;
            *w = w.max(relative_frobenius(&fast, &exact));
        }
    }
    let checks: Vec<FilterCheck> = filters
        .iter()
        .zip(worst)
        .map(|((name, _), e)| FilterCheck {
            filter: name.clone(),
            max_rel_error: e,
        })
        .collect();
    let max_rel_error = checks.iter().map(|c| c.max_rel_error).fold(0.0, f64::max);
    Ok(OracleReport {
        graphs: trials,
        max_nodes,
        seed,
        filters: checks,
        max_rel_error,
    })
}
