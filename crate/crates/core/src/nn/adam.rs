use serde::{Deserialize, Serialize};

use super::{Gradients, MlpModel};
use crate::error::{IdsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.001;

    /// Zeroed accumulators for parameter tensors of the given lengths.
    pub fn new(shapes: &[usize], learning_rate: f64) -> Self {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_model(model: &MlpModel, learning_rate: f64) -> Self {
        let shapes: Vec<usize> = model
            .layers()
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect();
        Self::new(&shapes, learning_rate)
    }

    /// One bias-corrected Adam update.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(IdsError::Shape(format!(
                "adam state has {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(IdsError::Shape(format!("tensor {i}: length mismatch")));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for j in 0..p.len() {
                let gj = g[j];
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * gj;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * gj * gj;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }

    pub fn step_model(&mut self, model: &mut MlpModel, grads: &Gradients) -> Result<()> {
        let flat: Vec<&[f64]> = grads
            .weights
            .iter()
            .zip(&grads.biases)
            .flat_map(|(w, b)| {
                [
                    w.as_slice().expect("standard layout"),
                    b.as_slice().expect("standard layout"),
                ]
            })
            .collect();
        let mut params = model.parameters_mut();
        self.step(&mut params, &flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = AdamState::new(&[3], 0.001);
        let mut w = vec![1.0, -2.0, 0.5];
        s.step(&mut [&mut w], &[&[0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(w, [1.0, -2.0, 0.5]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = 1, v_hat = 1 at t = 1, so the step is lr / (1 + eps)
        let mut s = AdamState::new(&[1], 0.001);
        let mut w = vec![0.0];
        s.step(&mut [&mut w], &[&[1.0]]).unwrap();
        assert_abs_diff_eq!(w[0], -0.001 / (1.0 + 1e-8), epsilon = 1e-15);
    }

    #[test]
    fn quadratic_loss_decreases() {
        let mut s = AdamState::new(&[1], 0.001);
        let mut w = vec![3.0];
        let f = |w: f64| w * w;
        let mut last = f(w[0]);
        for _ in 0..2 {
            let g = 2.0 * w[0];
            s.step(&mut [&mut w], &[&[g]]).unwrap();
            assert!(f(w[0]) < last);
            last = f(w[0]);
        }
    }

    #[test]
    fn shape_mismatch_errors() {
        let mut s = AdamState::new(&[2], 0.001);
        let mut w = vec![0.0; 3];
        assert!(s.step(&mut [&mut w], &[&[0.0, 0.0, 0.0]]).is_err());
        assert!(s.step(&mut [], &[]).is_err());
    }
}
