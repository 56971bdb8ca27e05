//! Supervised binary baselines: decision tree, random forest, Gaussian
//! naive Bayes, linear SVM, AdaBoost, gradient boosting and an MLP.
//!
//! Labels are class indices; for the binary task 0 = normal, 1 = attack.

mod boost;
mod forest;
mod gnb;
mod mlp;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use boost::{
    fit_adaboost, fit_adaboost_with, fit_gradient_boost, stump_weight, AdaBoost, AdaBoostConfig, GradientBoost,
    GradientBoostConfig,
};
pub use forest::{fit_forest, ForestConfig, RandomForest};
pub use gnb::{fit_gnb, GaussianNb, VARIANCE_FLOOR};
pub use mlp::{fit_mlp, MlpBaseline, MlpBaselineConfig};
pub use svm::{fit_linear_svm, LinearSvm, LinearSvmConfig};
pub use tree::{fit_tree, gini, DecisionTree, DecisionTreeConfig, NestedNode, Target, TreeBuilder, TreeNode};

use crate::error::{IdsError, Result};

/// Row-wise class prediction.
pub trait Classifier {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize;

    fn predict(&self, x: &Array2<f64>) -> Vec<usize>
    where
        Self: Sync,
    {
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.predict_row(x.row(i)))
            .collect()
    }
}

impl Classifier for DecisionTree {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        self.predict_class(row)
    }
}

impl Classifier for RandomForest {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        RandomForest::predict_row(self, row)
    }
}

impl Classifier for GaussianNb {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        GaussianNb::predict_row(self, row)
    }
}

impl Classifier for LinearSvm {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        (self.decision(row) > 0.0) as usize
    }
}

impl Classifier for AdaBoost {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        AdaBoost::predict_row(self, row)
    }
}

impl Classifier for GradientBoost {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        GradientBoost::predict_row(self, row)
    }
}

impl Classifier for MlpBaseline {
    fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        MlpBaseline::predict_row(self, row)
    }

    fn predict(&self, x: &Array2<f64>) -> Vec<usize> {
        self.predict_batch(x).unwrap_or_else(|_| vec![0; x.nrows()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    DecisionTree,
    RandomForest,
    NaiveBayes,
    Svm,
    AdaBoost,
    GradientBoosting,
    Mlp,
}

impl Baseline {
    /// Table order used in reports.
    pub const ALL: [Baseline; 7] = [
        Baseline::DecisionTree,
        Baseline::RandomForest,
        Baseline::NaiveBayes,
        Baseline::Svm,
        Baseline::AdaBoost,
        Baseline::GradientBoosting,
        Baseline::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::DecisionTree => "decision_tree",
            Baseline::RandomForest => "random_forest",
            Baseline::NaiveBayes => "naive_bayes",
            Baseline::Svm => "svm",
            Baseline::AdaBoost => "adaboost",
            Baseline::GradientBoosting => "gradient_boosting",
            Baseline::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Baseline::DecisionTree => "Decision Tree",
            Baseline::RandomForest => "Random Forest",
            Baseline::NaiveBayes => "Naive Bayes",
            Baseline::Svm => "SVM",
            Baseline::AdaBoost => "AdaBoost",
            Baseline::GradientBoosting => "Gradient Boosting",
            Baseline::Mlp => "MLP",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = IdsError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Baseline::ALL.into_iter().find(|b| b.name() == key).ok_or_else(|| {
            let valid: Vec<_> = Baseline::ALL.iter().map(|b| b.name()).collect();
            IdsError::Config(format!("unknown baseline '{s}'; valid names: {}", valid.join(", ")))
        })
    }
}

/// Hyperparameters for every baseline; `seed` overrides the per-model seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct BaselineConfig {
    pub tree: DecisionTreeConfig,
    pub forest: ForestConfig,
    pub svm: LinearSvmConfig,
    pub adaboost: AdaBoostConfig,
    pub gradient_boost: GradientBoostConfig,
    pub mlp: MlpBaselineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum FittedBaseline {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    NaiveBayes(GaussianNb),
    Svm(LinearSvm),
    AdaBoost(AdaBoost),
    GradientBoosting(GradientBoost),
    Mlp(MlpBaseline),
}

impl FittedBaseline {
    pub fn kind(&self) -> Baseline {
        match self {
            FittedBaseline::DecisionTree(_) => Baseline::DecisionTree,
            FittedBaseline::RandomForest(_) => Baseline::RandomForest,
            FittedBaseline::NaiveBayes(_) => Baseline::NaiveBayes,
            FittedBaseline::Svm(_) => Baseline::Svm,
            FittedBaseline::AdaBoost(_) => Baseline::AdaBoost,
            FittedBaseline::GradientBoosting(_) => Baseline::GradientBoosting,
            FittedBaseline::Mlp(_) => Baseline::Mlp,
        }
    }

    pub fn predict(&self, x: &Array2<f64>) -> Vec<usize> {
        match self {
            FittedBaseline::DecisionTree(m) => m.predict(x),
            FittedBaseline::RandomForest(m) => m.predict(x),
            FittedBaseline::NaiveBayes(m) => m.predict(x),
            FittedBaseline::Svm(m) => m.predict(x),
            FittedBaseline::AdaBoost(m) => m.predict(x),
            FittedBaseline::GradientBoosting(m) => m.predict(x),
            FittedBaseline::Mlp(m) => Classifier::predict(m, x),
        }
    }
}

/// Fits one binary baseline (labels 0 = normal, 1 = attack).
pub fn fit_baseline(
    kind: Baseline,
    x: &Array2<f64>,
    labels: &[usize],
    cfg: &BaselineConfig,
    seed: u64,
) -> Result<FittedBaseline> {
    if x.nrows() == 0 {
        return Err(IdsError::InvalidInput("no training rows".into()));
    }
    if x.nrows() != labels.len() {
        return Err(IdsError::Shape("one label per row required".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(IdsError::InvalidInput("binary baselines expect labels 0/1".into()));
    }
    Ok(match kind {
        Baseline::DecisionTree => FittedBaseline::DecisionTree(fit_tree(x, labels, 2, &cfg.tree)?),
        Baseline::RandomForest => {
            let fc = ForestConfig { seed, ..cfg.forest };
            FittedBaseline::RandomForest(fit_forest(x, labels, 2, &fc)?)
        }
        Baseline::NaiveBayes => FittedBaseline::NaiveBayes(fit_gnb(x, labels, 2)?),
        Baseline::Svm => {
            let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
            let sc = LinearSvmConfig { seed, ..cfg.svm };
            let mut m = fit_linear_svm(x, &y, &sc)?;
            m.margin_violators.clear();
            FittedBaseline::Svm(m)
        }
        Baseline::AdaBoost => FittedBaseline::AdaBoost(fit_adaboost(x, labels, &cfg.adaboost)?),
        Baseline::GradientBoosting => {
            FittedBaseline::GradientBoosting(fit_gradient_boost(x, labels, &cfg.gradient_boost)?)
        }
        Baseline::Mlp => {
            let mut mc = cfg.mlp.clone();
            mc.train.seed = seed;
            FittedBaseline::Mlp(fit_mlp(x, labels, 2, &mc)?)
        }
    })
}
