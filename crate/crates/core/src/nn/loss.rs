use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{GdnError, Result};

fn check(x: &ArrayView2<f64>, pred: &ArrayView2<f64>, mask: &ArrayView2<bool>) -> Result<usize> {
    if x.dim() != pred.dim() || x.dim() != mask.dim() {
        return Err(GdnError::shape("masked_mse", x.dim(), (pred.dim(), mask.dim())));
    }
    match mask.iter().filter(|&&m| m).count() {
        0 => Err(GdnError::EmptyMask),
        k => Ok(k),
    }
}

/// Mean of `(x - pred)²` over entries where `mask` is set.
pub fn masked_mse(x: ArrayView2<f64>, pred: ArrayView2<f64>, mask: ArrayView2<bool>) -> Result<f64> {
    let count = check(&x, &pred, &mask)?;
    let mut sum = 0.0;
    Zip::from(x).and(pred).and(mask).for_each(|&a, &b, &m| {
        if m {
            sum += (a - b) * (a - b);
        }
    });
    Ok(sum / count as f64)
}

/// `∂ masked_mse / ∂ pred`: `2 (pred - x) / |mask|` on the mask, zero elsewhere.
pub fn masked_mse_grad(
    x: ArrayView2<f64>,
    pred: ArrayView2<f64>,
    mask: ArrayView2<bool>,
) -> Result<Array2<f64>> {
    let count = check(&x, &pred, &mask)? as f64;
    Ok(Zip::from(x)
        .and(pred)
        .and(mask)
        .map_collect(|&a, &b, &m| if m { 2.0 * (b - a) / count } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn basic_values() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let all = Array2::from_elem((2, 2), true);
        assert_eq!(masked_mse(x.view(), x.view(), all.view()).unwrap(), 0.0);
        let one = array![[true]];
        assert_eq!(masked_mse(array![[2.0]].view(), array![[0.0]].view(), one.view()).unwrap(), 4.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let x = array![[1.0]];
        assert!(matches!(
            masked_mse(x.view(), x.view(), array![[false]].view()),
            Err(GdnError::EmptyMask)
        ));
    }

    #[test]
    fn gradient_zero_off_mask() {
        let x = array![[1.0, 2.0]];
        let p = array![[0.0, 0.0]];
        let g = masked_mse_grad(x.view(), p.view(), array![[true, false]].view()).unwrap();
        assert_eq!(g, array![[-2.0, 0.0]]);
    }

    proptest! {
        #[test]
        fn full_mask_equals_plain_mse(vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40)) {
            let n = vals.len();
            let x = Array2::from_shape_fn((n, 1), |(i, _)| vals[i].0);
            let p = Array2::from_shape_fn((n, 1), |(i, _)| vals[i].1);
            let mask = Array2::from_elem((n, 1), true);
            let plain = vals.iter().map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
            let got = masked_mse(x.view(), p.view(), mask.view()).unwrap();
            prop_assert!((got - plain).abs() <= 1e-12 * plain.max(1.0));
        }
    }
}
