//! Adam with decoupled weight decay.

use crate::error::{shape_err, Result};
use crate::nn::{Gradients, MlpAutoencoder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first: Gradients,
    second: Gradients,
}

impl AdamState {
    pub fn new(model: &MlpAutoencoder, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update:
    /// `θ ← θ − lr·wd·θ − lr·m̂ / (√v̂ + eps)`.
    pub fn step(&mut self, model: &mut MlpAutoencoder, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != model.layers().len()
            || self.first.layers.len() != grads.layers.len()
        {
            return shape_err("gradient layer count does not match the model".to_string());
        }
        for ((layer, g), m) in model
            .layers()
            .iter()
            .zip(&grads.layers)
            .zip(&self.first.layers)
        {
            if g.weight.shape() != layer.weight.shape()
                || g.bias.len() != layer.bias.len()
                || m.weight.shape() != layer.weight.shape()
            {
                return shape_err("gradient shapes do not match the parameters".to_string());
            }
        }

        self.step += 1;
        let AdamConfig {
            lr,
            weight_decay,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);

        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * weight_decay * p[i] + lr * m_hat / (v_hat.sqrt() + eps);
            }
        };

        for (((layer, g), m), v) in model
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first.layers)
            .zip(&mut self.second.layers)
        {
            update(
                layer.weight.as_mut_slice(),
                g.weight.as_slice(),
                m.weight.as_mut_slice(),
                v.weight.as_mut_slice(),
            );
            update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::AeDims;

    fn model() -> MlpAutoencoder {
        MlpAutoencoder::init(AeDims::new(4, 3, 2, 1), 3).unwrap()
    }

    #[test]
    fn zero_gradient_without_decay_leaves_parameters() {
        let mut m = model();
        let before = m.clone();
        let mut state = AdamState::new(
            &m,
            AdamConfig {
                weight_decay: 0.0,
                ..AdamConfig::default()
            },
        );
        state.step(&mut m, &Gradients::zeros_like(&before)).unwrap();
        assert_eq!(m, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut m = model();
        let before = m.clone();
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut grads = Gradients::zeros_like(&m);
        grads.layers[2].bias[0] = 1.0;
        let mut state = AdamState::new(&m, cfg);
        state.step(&mut m, &grads).unwrap();
        // t = 1: m̂ = g, v̂ = g², so the step is lr·1/(1 + eps).
        let moved = before.layers()[2].bias[0] - m.layers()[2].bias[0];
        let expected = 1e-3 / (1.0 + 1e-8);
        assert!((moved - expected).abs() < 1e-18);
    }

    #[test]
    fn decoupled_decay_shrinks_unit_parameter() {
        let mut m = model();
        m.layers_mut()[0].bias[0] = 1.0;
        let mut state = AdamState::new(&m, AdamConfig::default());
        state
            .step(&mut m, &Gradients::zeros_like(&model()))
            .unwrap();
        let shrink = 1.0 - m.layers()[0].bias[0];
        assert!((shrink - 1e-3 * 1e-5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_gradients_are_rejected() {
        let mut m = model();
        let other = MlpAutoencoder::init(AeDims::new(5, 3, 2, 1), 0).unwrap();
        let mut state = AdamState::new(&m, AdamConfig::default());
        assert!(state.step(&mut m, &Gradients::zeros_like(&other)).is_err());
        assert_eq!(state.step_count(), 0);
    }
}
