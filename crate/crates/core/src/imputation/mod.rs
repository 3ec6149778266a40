//! Feature imputation: classical baselines, RMSE and the benchmark harness.

mod baselines;
mod benchmark;

pub use baselines::{knn_impute, mean_impute, svd_impute, KNN_DEFAULT_K, SVD_DEFAULT_ITERS, SVD_DEFAULT_RANK};
pub use benchmark::{
    run_benchmark, run_sweep, sweep_csv, BenchmarkConfig, ImputationReport, Method, SweepRow,
};

use ndarray::ArrayView2;

use crate::error::{GdnError, Result};

/// `sqrt(mean over masked entries of (truth - pred)^2)`.
pub fn evaluate_rmse(
    truth: ArrayView2<f64>,
    pred: ArrayView2<f64>,
    mask: ArrayView2<bool>,
) -> Result<f64> {
    if truth.dim() != pred.dim() {
        return Err(GdnError::shape("evaluate_rmse prediction", truth.dim(), pred.dim()));
    }
    if truth.dim() != mask.dim() {
        return Err(GdnError::shape("evaluate_rmse mask", truth.dim(), mask.dim()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for ((t, p), &m) in truth.iter().zip(pred.iter()).zip(mask.iter()) {
        if m {
            sum += (t - p) * (t - p);
            count += 1;
        }
    }
    if count == 0 {
        return Err(GdnError::EmptyMask);
    }
    Ok((sum / count as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::masked_mse;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn perfect_and_single_entry() {
        let t = array![[1.0, 2.0], [3.0, 4.0]];
        let all = Array2::from_elem((2, 2), true);
        assert_eq!(evaluate_rmse(t.view(), t.view(), all.view()).unwrap(), 0.0);
        let p = array![[1.0, 5.0], [3.0, 4.0]];
        let one = array![[false, true], [false, false]];
        assert_eq!(evaluate_rmse(t.view(), p.view(), one.view()).unwrap(), 3.0);
        let none = Array2::from_elem((2, 2), false);
        assert!(matches!(
            evaluate_rmse(t.view(), p.view(), none.view()),
            Err(GdnError::EmptyMask)
        ));
    }

    proptest! {
        #[test]
        fn rmse_is_sqrt_of_masked_mse(
            vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 12)
        ) {
            prop_assume!(vals.iter().any(|v| v.2));
            let t = Array2::from_shape_fn((3, 4), |(i, j)| vals[i * 4 + j].0);
            let p = Array2::from_shape_fn((3, 4), |(i, j)| vals[i * 4 + j].1);
            let m = Array2::from_shape_fn((3, 4), |(i, j)| vals[i * 4 + j].2);
            let rmse = evaluate_rmse(t.view(), p.view(), m.view()).unwrap();
            let mse = masked_mse(p.view(), t.view(), m.view()).unwrap();
            prop_assert!((rmse - mse.sqrt()).abs() <= 1e-12);
        }
    }
}
