use serde::{Deserialize, Serialize};

use crate::model::network::{GradientSet, ModelParameters};
use crate::real::Real;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one entry per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub first_moment: Vec<Vec<T>>,
    pub second_moment: Vec<Vec<T>>,
    pub step: u64,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(params: &ModelParameters<T>) -> Self {
        let zeros: Vec<Vec<T>> = params
            .blocks()
            .iter()
            .map(|b| vec![T::zero(); b.len()])
            .collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<T: Real>(
    state: &mut OptimizerState<T>,
    params: &mut ModelParameters<T>,
    grads: &GradientSet<T>,
    cfg: &AdamConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let b1 = T::from_f64(cfg.beta1);
    let b2 = T::from_f64(cfg.beta2);
    let one_minus_b1 = T::from_f64(1.0 - cfg.beta1);
    let one_minus_b2 = T::from_f64(1.0 - cfg.beta2);
    let correct1 = T::from_f64(1.0 - cfg.beta1.powi(t));
    let correct2 = T::from_f64(1.0 - cfg.beta2.powi(t));
    let lr = T::from_f64(cfg.learning_rate);
    let eps = T::from_f64(cfg.epsilon);

    let blocks = params.blocks_mut();
    let grad_blocks = grads.blocks();
    for (((p, g), m), v) in blocks
        .into_iter()
        .zip(grad_blocks)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + one_minus_b1 * gi;
            v[i] = b2 * v[i] + one_minus_b2 * gi * gi;
            let m_hat = m[i] / correct1;
            let v_hat = v[i] / correct2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::ModelConfig;

    fn scalar_model() -> ModelParameters<f64> {
        ModelParameters::zeros(&ModelConfig {
            input_length: 1,
            op_layers: vec![],
            q_order: 1,
            dense_width: 1,
            output_classes: 1,
        })
        .unwrap()
    }

    #[test]
    fn first_step_size() {
        let mut p = scalar_model();
        let mut g = p.zeros_like();
        g.dense.weights[0] = 1.0;
        let mut st = OptimizerState::new(&p);
        adam_step(&mut st, &mut p, &g, &AdamConfig::default());
        let expected = -1e-4 / (1.0 + 1e-8);
        assert!((p.dense.weights[0] - expected).abs() < 1e-18);
        assert!((p.dense.weights[0] + 9.99999e-5).abs() < 1e-10);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = scalar_model();
        p.dense.weights[0] = 0.3;
        p.output.biases[0] = -0.2;
        let before = p.clone();
        let g = p.zeros_like();
        let mut st = OptimizerState::new(&p);
        for _ in 0..50 {
            adam_step(&mut st, &mut p, &g, &AdamConfig::default());
        }
        assert_eq!(p, before);
    }

    #[test]
    fn identical_histories_identical_updates() {
        let mut p = scalar_model();
        p.dense.weights[0] = 0.5;
        p.output.weights[0] = 0.5;
        let mut st = OptimizerState::new(&p);
        for k in 0..20 {
            let mut g = p.zeros_like();
            g.dense.weights[0] = (k as f64 * 0.3).sin();
            g.output.weights[0] = (k as f64 * 0.3).sin();
            adam_step(&mut st, &mut p, &g, &AdamConfig::default());
        }
        assert_eq!(p.dense.weights[0], p.output.weights[0]);
    }
}
