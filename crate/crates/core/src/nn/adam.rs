use ndarray::{Array2, Zip};

use super::params::Parameters;
use crate::error::{GdnError, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates for each parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new<P: Parameters>(params: &P) -> Self {
        let zeros: Vec<_> = params.tensors().iter().map(|t| Array2::zeros(t.dim())).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update. A non-finite gradient anywhere aborts
    /// the step before any parameter or moment is touched.
    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P, lr: f64) -> Result<()> {
        let grads = grads.tensors();
        let names = params.names();
        let mut targets = params.tensors_mut();
        if grads.len() != targets.len() || grads.len() != self.m.len() {
            return Err(GdnError::shape("adam_step", self.m.len(), grads.len()));
        }
        for ((g, p), name) in grads.iter().zip(targets.iter()).zip(&names) {
            if g.dim() != p.dim() {
                return Err(GdnError::shape("adam_step", p.dim(), g.dim()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(GdnError::NonFinite(format!("gradient of {name}")));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t as i32);
        let bc2 = 1.0 - BETA2.powi(self.t as i32);
        for (((p, g), m), v) in targets
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            Zip::from(&mut **p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
                });
        }
        Ok(())
    }
}
