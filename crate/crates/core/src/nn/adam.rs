use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::ParameterSet;

/// Adaptive-moment optimizer with bias correction. Moments persist across steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self::with_betas(lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one update from the gradients currently accumulated in `params`.
    pub fn step(&mut self, params: &mut ParameterSet) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (name, value, grad) in params.iter_with_grads_mut() {
            let m = self
                .m
                .entry(name.to_string())
                .or_insert_with(|| vec![0.0; grad.len()]);
            let v = self
                .v
                .entry(name.to_string())
                .or_insert_with(|| vec![0.0; grad.len()]);
            for (((p, &g), mi), vi) in value.data_mut().iter_mut().zip(grad.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;

    fn one_param(value: Vec<f64>, grad: Vec<f64>) -> ParameterSet {
        let n = value.len();
        let mut p = ParameterSet::new();
        p.insert("w", Tensor::matrix(1, n, value).unwrap());
        p.grad_mut("w").unwrap().data_mut().copy_from_slice(&grad);
        p
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = one_param(vec![0.5, -1.0], vec![0.0, 0.0]);
        Adam::new(1e-2).step(&mut p);
        assert_eq!(p.get("w").unwrap().data(), &[0.5, -1.0]);
    }

    #[test]
    fn first_step_closed_form() {
        let g = [0.3, -2.0, 1e-3];
        let mut p = one_param(vec![0.0; 3], g.to_vec());
        let mut adam = Adam::new(0.01);
        adam.step(&mut p);
        for (k, &gk) in g.iter().enumerate() {
            // bias-corrected moments equal g and g² after one step
            let expected = -0.01 * gk / (gk.abs() + 1e-8);
            assert!((p.get("w").unwrap().data()[k] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let run = || {
            let mut p = one_param(vec![1.0, 2.0], vec![0.1, -0.2]);
            let mut adam = Adam::new(1e-3);
            for _ in 0..10 {
                adam.step(&mut p);
            }
            p
        };
        assert_eq!(run(), run());
    }
}
