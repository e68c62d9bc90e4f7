use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_opt: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        AdamState {
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps_opt: 1e-8,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// One bias-corrected Adam update over all trainable tensors, then zeroes
    /// their gradients.
    pub fn step(&mut self, tensors: &mut [Tensor]) -> Result<()> {
        if self.m.is_empty() {
            self.m = tensors.iter().map(|t| vec![0.0; t.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != tensors.len() {
            return Err(Error::Contract(format!(
                "adam state tracks {} tensors, got {}",
                self.m.len(),
                tensors.len()
            )));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.requires_grad && t.grad.is_none() {
                return Err(Error::Contract(format!("tensor {i} has no gradient")));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((tensor, m), v) in tensors.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            if !tensor.requires_grad {
                continue;
            }
            let grad = tensor.grad.as_ref().expect("checked above");
            for k in 0..grad.len() {
                let g = grad[k];
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let mhat = m[k] / bc1;
                let vhat = v[k] / bc2;
                tensor.values[k] -= self.lr * mhat / (vhat.sqrt() + self.eps_opt);
            }
            tensor.zero_grad();
        }
        Ok(())
    }
}
