use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, DecisionTreeConfig, Target, TreeBuilder};
use crate::error::{IdsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Draw a with-replacement bootstrap sample per tree.
    pub bootstrap: bool,
    /// Bootstrap sample size as a fraction of the training rows.
    pub bootstrap_fraction: f64,
    /// Features examined per split; `None` = round(sqrt(n_features)).
    pub max_features: Option<usize>,
    pub tree: DecisionTreeConfig,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            bootstrap: true,
            bootstrap_fraction: 1.0,
            max_features: None,
            tree: DecisionTreeConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub k: usize,
    pub trees: Vec<DecisionTree>,
}

fn tree_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn fit_forest(x: &Array2<f64>, labels: &[usize], k: usize, cfg: &ForestConfig) -> Result<RandomForest> {
    if cfg.n_trees == 0 {
        return Err(IdsError::Config("n_trees must be >= 1".into()));
    }
    if !(cfg.bootstrap_fraction > 0.0) {
        return Err(IdsError::Config("bootstrap_fraction must be > 0".into()));
    }
    let n = x.nrows();
    let max_features = cfg
        .max_features
        .unwrap_or_else(|| ((x.ncols() as f64).sqrt().round() as usize).max(1));
    let tree_cfg = DecisionTreeConfig {
        max_features: Some(max_features),
        ..cfg.tree
    };
    let builder = TreeBuilder::new(x);
    let target = Target::Classes { labels, k };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng_from_seed(tree_seed(cfg.seed, i));
            let weights = if cfg.bootstrap {
                let draws = ((n as f64) * cfg.bootstrap_fraction).round().max(1.0) as usize;
                let mut w = vec![0.0; n];
                for _ in 0..draws {
                    w[rng.random_range(0..n)] += 1.0;
                }
                w
            } else {
                vec![1.0; n]
            };
            builder.fit(&target, &weights, &tree_cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest { k, trees })
}

impl RandomForest {
    /// Majority vote; ties go to the lower class index.
    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        let mut votes = vec![0.0; self.k];
        for t in &self.trees {
            votes[t.predict_class(row)] += 1.0;
        }
        crate::nn::argmax(&votes)
    }
}
