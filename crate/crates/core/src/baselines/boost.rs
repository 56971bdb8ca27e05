use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, DecisionTreeConfig, Target, TreeBuilder};
use crate::error::{IdsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostConfig {
    pub n_rounds: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig { n_rounds: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl Default for GradientBoostConfig {
    fn default() -> Self {
        GradientBoostConfig {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
        }
    }
}

/// Weighted vote of depth-1 stumps over labels {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
}

/// Stump weight 0.5 ln((1 - err) / err).
pub fn stump_weight(err: f64) -> f64 {
    0.5 * ((1.0 - err) / err).ln()
}

fn check_binary(labels: &[usize], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(IdsError::Shape("one label per row required".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(IdsError::InvalidInput("boosting expects binary labels 0/1".into()));
    }
    if n == 0 {
        return Err(IdsError::InvalidInput("no training rows".into()));
    }
    Ok(())
}

/// AdaBoost over Gini stumps. `on_round` sees the normalized sample
/// weights after each completed round.
pub fn fit_adaboost_with(
    x: &Array2<f64>,
    labels: &[usize],
    cfg: &AdaBoostConfig,
    mut on_round: impl FnMut(&[f64]),
) -> Result<AdaBoost> {
    check_binary(labels, x.nrows())?;
    if cfg.n_rounds == 0 {
        return Err(IdsError::Config("n_rounds must be >= 1".into()));
    }
    let n = x.nrows();
    let builder = TreeBuilder::new(x);
    let stump_cfg = DecisionTreeConfig {
        max_depth: 1,
        min_samples_split: 2,
        max_features: None,
    };
    let target = Target::Classes { labels, k: 2 };
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoost {
        stumps: Vec::new(),
        alphas: Vec::new(),
    };
    let mut rng = crate::rng_from_seed(0);
    for _ in 0..cfg.n_rounds {
        // scaled so min_samples_split still counts rows
        let scaled: Vec<f64> = w.iter().map(|v| v * n as f64).collect();
        let stump = builder.fit(&target, &scaled, &stump_cfg, &mut rng)?;
        let pred: Vec<usize> = (0..n).map(|i| stump.predict_class(x.row(i))).collect();
        let err: f64 = (0..n).filter(|&i| pred[i] != labels[i]).map(|i| w[i]).sum();
        if err >= 0.5 {
            break;
        }
        let perfect = err <= 0.0;
        let alpha = stump_weight(err.max(1e-10));
        for i in 0..n {
            let agree = if pred[i] == labels[i] { 1.0 } else { -1.0 };
            w[i] *= (-alpha * agree).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        model.stumps.push(stump);
        model.alphas.push(alpha);
        on_round(&w);
        if perfect {
            break;
        }
    }
    Ok(model)
}

pub fn fit_adaboost(x: &Array2<f64>, labels: &[usize], cfg: &AdaBoostConfig) -> Result<AdaBoost> {
    fit_adaboost_with(x, labels, cfg, |_| {})
}

impl AdaBoost {
    /// Sum of alpha * (+1 for class 1, -1 for class 0).
    pub fn score(&self, row: ArrayView1<f64>) -> f64 {
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| if s.predict_class(row) == 1 { *a } else { -*a })
            .sum()
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        (self.score(row) > 0.0) as usize
    }
}

/// Additive regression trees on the logistic loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoost {
    pub prior_log_odds: f64,
    pub learning_rate: f64,
    pub trees: Vec<DecisionTree>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn fit_gradient_boost(x: &Array2<f64>, labels: &[usize], cfg: &GradientBoostConfig) -> Result<GradientBoost> {
    check_binary(labels, x.nrows())?;
    if !(cfg.learning_rate > 0.0) {
        return Err(IdsError::Config("learning_rate must be > 0".into()));
    }
    let n = x.nrows();
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let p = (y.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let prior = (p / (1.0 - p)).ln();
    let mut f = vec![prior; n];
    let builder = TreeBuilder::new(x);
    let tree_cfg = DecisionTreeConfig {
        max_depth: cfg.max_depth,
        min_samples_split: 2,
        max_features: None,
    };
    let ones = vec![1.0; n];
    let mut rng = crate::rng_from_seed(0);
    let mut trees = Vec::with_capacity(cfg.n_rounds);
    for _ in 0..cfg.n_rounds {
        let prob: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
        let grad: Vec<f64> = (0..n).map(|i| y[i] - prob[i]).collect();
        let hess: Vec<f64> = prob.iter().map(|p| p * (1.0 - p)).collect();
        let tree = builder.fit(
            &Target::Newton {
                grad: &grad,
                hess: &hess,
            },
            &ones,
            &tree_cfg,
            &mut rng,
        )?;
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += cfg.learning_rate * tree.predict_value(x.row(i));
        }
        trees.push(tree);
    }
    Ok(GradientBoost {
        prior_log_odds: prior,
        learning_rate: cfg.learning_rate,
        trees,
    })
}

impl GradientBoost {
    pub fn score(&self, row: ArrayView1<f64>) -> f64 {
        self.prior_log_odds
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.predict_value(row))
                .sum::<f64>()
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        (self.score(row) > 0.0) as usize
    }
}
