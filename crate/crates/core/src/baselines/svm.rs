use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmConfig {
    /// Weight of the lambda * ||w||^2 penalty.
    pub lambda: f64,
    pub epochs: usize,
    /// Initial step size; step t uses eta0 / (1 + 2 lambda eta0 t).
    pub eta0: f64,
    pub seed: u64,
}

impl Default for LinearSvmConfig {
    fn default() -> Self {
        LinearSvmConfig {
            lambda: 1e-4,
            epochs: 20,
            eta0: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training rows with positive hinge loss at the final iterate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margin_violators: Vec<usize>,
}

/// Primal hinge-loss SVM, `mean(max(0, 1 - y (w.x + b))) + lambda ||w||^2`,
/// by stochastic subgradient steps. Labels are +1 / -1.
pub fn fit_linear_svm(x: &Array2<f64>, y: &[f64], cfg: &LinearSvmConfig) -> Result<LinearSvm> {
    if !(cfg.lambda > 0.0) {
        return Err(IdsError::Config("svm lambda must be > 0".into()));
    }
    if !(cfg.eta0 > 0.0) {
        return Err(IdsError::Config("svm eta0 must be > 0".into()));
    }
    if x.nrows() != y.len() {
        return Err(IdsError::Shape("one label per row required".into()));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(IdsError::InvalidInput("svm labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(IdsError::InvalidInput("svm training needs both classes".into()));
    }
    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = cfg.eta0 / (1.0 + 2.0 * cfg.lambda * cfg.eta0 * t as f64);
            t += 1;
            let row = x.row(i);
            let margin = y[i] * (w.dot(&row) + b);
            w *= 1.0 - 2.0 * eta * cfg.lambda;
            if margin < 1.0 {
                w.scaled_add(eta * y[i], &row);
                b += eta * y[i];
            }
        }
    }
    let margin_violators = (0..x.nrows())
        .filter(|&i| y[i] * (w.dot(&x.row(i)) + b) < 1.0)
        .collect();
    Ok(LinearSvm {
        weights: w.to_vec(),
        bias: b,
        margin_violators,
    })
}

impl LinearSvm {
    pub fn decision(&self, row: ArrayView1<f64>) -> f64 {
        self.weights.iter().zip(row.iter()).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// +1 when the decision value is positive, otherwise -1.
    pub fn predict_sign(&self, row: ArrayView1<f64>) -> f64 {
        if self.decision(row) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn hinge_loss(&self, row: ArrayView1<f64>, y: f64) -> f64 {
        (1.0 - y * self.decision(row)).max(0.0)
    }
}
