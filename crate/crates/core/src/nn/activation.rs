use ndarray::{Array2, ArrayView2, Zip};

/// Default negative slope for Leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.2;

pub fn leaky_relu(x: ArrayView2<f64>, slope: f64) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { v } else { slope * v })
}

pub fn relu(x: ArrayView2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

/// `grad ⊙ σ'(pre)` for Leaky ReLU.
pub fn leaky_relu_backward(grad: ArrayView2<f64>, pre: ArrayView2<f64>, slope: f64) -> Array2<f64> {
    Zip::from(grad)
        .and(pre)
        .map_collect(|&g, &p| if p > 0.0 { g } else { slope * g })
}

pub fn relu_backward(grad: ArrayView2<f64>, pre: ArrayView2<f64>) -> Array2<f64> {
    Zip::from(grad)
        .and(pre)
        .map_collect(|&g, &p| if p > 0.0 { g } else { 0.0 })
}
