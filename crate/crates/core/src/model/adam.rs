use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{GradientSet, ModelParameters};
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    m: [Vec<f64>; 5],
    v: [Vec<f64>; 5],
    step: u64,
}

impl OptimizerState {
    pub fn new(params: &ModelParameters) -> Self {
        let zeros = |p: &ModelParameters| p.tensors().map(|t| vec![0.0; t.len()]);
        Self {
            m: zeros(params),
            v: zeros(params),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Bias-corrected Adam update of one tensor at step `t` (1-based).
pub fn adam_update(param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], t: u64, lr: f64) {
    let bc1 = 1.0 - libm::pow(ADAM_BETA1, t as f64);
    let bc2 = 1.0 - libm::pow(ADAM_BETA2, t as f64);
    for idx in 0..param.len() {
        let g = grad[idx];
        m[idx] = ADAM_BETA1 * m[idx] + (1.0 - ADAM_BETA1) * g;
        v[idx] = ADAM_BETA2 * v[idx] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = m[idx] / bc1;
        let v_hat = v[idx] / bc2;
        param[idx] -= lr * m_hat / (libm::sqrt(v_hat) + ADAM_EPSILON);
    }
}

pub fn adam_step(
    params: &mut ModelParameters,
    grads: &GradientSet,
    state: &mut OptimizerState,
    learning_rate: f64,
) -> Result<()> {
    let g = grads.tensors();
    for (slot, p) in params.tensors().iter().enumerate() {
        if p.len() != g[slot].len() || p.len() != state.m[slot].len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor {slot}: params {}, grads {}, state {}",
                p.len(),
                g[slot].len(),
                state.m[slot].len()
            )));
        }
    }
    state.step += 1;
    let t = state.step;
    for (slot, p) in params.tensors_mut().into_iter().enumerate() {
        adam_update(
            p,
            g[slot],
            &mut state.m[slot],
            &mut state.v[slot],
            t,
            learning_rate,
        );
    }
    Ok(())
}
