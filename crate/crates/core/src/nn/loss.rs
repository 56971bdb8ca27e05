use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

/// Floor applied to probabilities before taking the log.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    CrossEntropy,
}

impl Loss {
    /// Batch loss and its gradient with respect to the prediction.
    /// MSE averages over every element; cross-entropy sums over classes
    /// and averages over rows.
    pub fn evaluate(self, prediction: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
        if prediction.dim() != target.dim() {
            return Err(IdsError::Shape(format!(
                "prediction {:?} vs target {:?}",
                prediction.dim(),
                target.dim()
            )));
        }
        let (n, d) = prediction.dim();
        if n == 0 || d == 0 {
            return Err(IdsError::Shape("empty loss input".into()));
        }
        match self {
            Loss::Mse => {
                let diff = &prediction - &target;
                let count = (n * d) as f64;
                let value = diff.iter().map(|v| v * v).sum::<f64>() / count;
                Ok((value, diff * (2.0 / count)))
            }
            Loss::CrossEntropy => {
                let mut value = 0.0;
                let mut grad = Array2::zeros((n, d));
                for ((i, j), &t) in target.indexed_iter() {
                    let p = prediction[[i, j]].max(LOG_CLAMP);
                    value -= t * p.ln();
                    grad[[i, j]] = -t / (p * n as f64);
                }
                Ok((value / n as f64, grad))
            }
        }
    }

    /// Gradient with respect to softmax logits for cross-entropy:
    /// (prediction - target) / n.
    pub fn fused_softmax_grad(prediction: ArrayView2<f64>, target: ArrayView2<f64>) -> Array2<f64> {
        let n = prediction.nrows().max(1) as f64;
        (&prediction - &target) / n
    }
}

/// Single-vector form of [`Loss::evaluate`].
pub fn loss(kind: Loss, prediction: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if prediction.len() != target.len() {
        return Err(IdsError::Shape(format!(
            "prediction length {} vs target length {}",
            prediction.len(),
            target.len()
        )));
    }
    let p = ArrayView2::from_shape((1, prediction.len()), prediction).map_err(|e| IdsError::Shape(e.to_string()))?;
    let t = ArrayView2::from_shape((1, target.len()), target).map_err(|e| IdsError::Shape(e.to_string()))?;
    let (value, grad) = kind.evaluate(p, t)?;
    Ok((value, grad.into_raw_vec_and_offset().0))
}
