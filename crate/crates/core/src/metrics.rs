//! Confusion matrices and the binary and multi-class scores built on them.
//!
//! `micro_f1` in [`MulticlassReport`] is the support-weighted mean of the
//! per-class F1 scores. The conventional pooled micro-F1 (global TP, FP and
//! FN) is reported separately as `pooled_f1`; for single-label multi-class
//! data it equals accuracy.

use std::fmt::{self, Display, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

/// Counts with rows = true class and columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion<T: PartialEq + Display>(truth: &[T], predicted: &[T], class_order: &[T]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(IdsError::Shape(format!(
            "{} true labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(IdsError::InvalidInput("confusion matrix of zero samples".into()));
    }
    let index = |label: &T| {
        class_order
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| IdsError::InvalidInput(format!("label '{label}' is not in the class order")))
    };
    let k = class_order.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (t, p) in truth.iter().zip(predicted) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        labels: class_order.iter().map(|c| c.to_string()).collect(),
        counts,
    })
}

impl ConfusionMatrix {
    /// An all-zero matrix over the given labels.
    pub fn empty(labels: Vec<String>) -> Self {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// trace / total, 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }

    /// CSV with a header row and a leading column of class names.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

impl Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .labels
            .iter()
            .map(|l| l.len())
            .chain(self.counts.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1);
        write!(f, "{:>width$}", "")?;
        for l in &self.labels {
            write!(f, " {l:>width$}")?;
        }
        writeln!(f)?;
        for (l, row) in self.labels.iter().zip(&self.counts) {
            write!(f, "{l:>width$}")?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Accuracy, precision, recall and F1 of a 2x2 matrix with the class at
/// index `positive` treated as positive. 0/0 ratios resolve to 0.
pub fn binary_metrics(cm: &ConfusionMatrix, positive: usize) -> Result<BinaryMetrics> {
    if cm.k() != 2 || positive > 1 {
        return Err(IdsError::Shape(format!(
            "binary metrics need a 2x2 matrix and positive index 0 or 1 (got {}x{}, {positive})",
            cm.k(),
            cm.k()
        )));
    }
    let negative = 1 - positive;
    let tp = cm.counts[positive][positive];
    let fn_ = cm.counts[positive][negative];
    let fp = cm.counts[negative][positive];
    let tn = cm.counts[negative][negative];
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(BinaryMetrics {
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        precision,
        recall,
        f1: f1_score(precision, recall),
        tp,
        tn,
        fp,
        fn_,
    })
}

/// Binary scores in both orientations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryReport {
    pub confusion: ConfusionMatrix,
    /// Scores with the second class (attack) positive.
    pub attack_positive: BinaryMetrics,
    /// Scores with the first class (normal) positive.
    pub normal_positive: BinaryMetrics,
}

pub fn binary_report(cm: ConfusionMatrix) -> Result<BinaryReport> {
    Ok(BinaryReport {
        attack_positive: binary_metrics(&cm, 1)?,
        normal_positive: binary_metrics(&cm, 0)?,
        confusion: cm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// One-vs-all scores per class.
pub fn per_class_f1(cm: &ConfusionMatrix) -> Result<Vec<ClassScore>> {
    if cm.k() < 2 {
        return Err(IdsError::Shape("per-class scores need at least two classes".into()));
    }
    Ok((0..cm.k())
        .map(|c| {
            let tp = cm.counts[c][c];
            let fp = cm.col_sum(c) - tp;
            let fn_ = cm.row_sum(c) - tp;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            ClassScore {
                label: cm.labels[c].clone(),
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: cm.row_sum(c),
            }
        })
        .collect())
}

/// (unweighted mean, support-weighted mean) of per-class scores.
pub fn macro_micro(f1: &[f64], supports: &[u64]) -> Result<(f64, f64)> {
    if f1.len() != supports.len() || f1.is_empty() {
        return Err(IdsError::Shape("per-class scores and supports must align".into()));
    }
    let total: u64 = supports.iter().sum();
    if total == 0 {
        return Err(IdsError::InvalidInput("total support is zero".into()));
    }
    let macro_avg = f1.iter().sum::<f64>() / f1.len() as f64;
    let weighted = f1.iter().zip(supports).map(|(f, &s)| f * s as f64).sum::<f64>() / total as f64;
    Ok((macro_avg, weighted))
}

/// Micro-F1 from globally pooled TP, FP and FN.
pub fn pooled_f1(cm: &ConfusionMatrix) -> f64 {
    let tp = cm.trace();
    let fp: u64 = (0..cm.k()).map(|c| cm.col_sum(c) - cm.counts[c][c]).sum();
    let fn_: u64 = (0..cm.k()).map(|c| cm.row_sum(c) - cm.counts[c][c]).sum();
    f1_score(ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassReport {
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassScore>,
    pub macro_f1: f64,
    /// Support-weighted mean of per-class F1.
    pub micro_f1: f64,
    pub pooled_f1: f64,
    pub accuracy: f64,
}

impl MulticlassReport {
    pub fn f1_of(&self, label: &str) -> Option<f64> {
        self.per_class.iter().find(|c| c.label == label).map(|c| c.f1)
    }
}

pub fn multiclass_report(cm: ConfusionMatrix) -> Result<MulticlassReport> {
    let per_class = per_class_f1(&cm)?;
    let f1: Vec<f64> = per_class.iter().map(|c| c.f1).collect();
    let supports: Vec<u64> = per_class.iter().map(|c| c.support).collect();
    let (macro_f1, micro_f1) = macro_micro(&f1, &supports)?;
    Ok(MulticlassReport {
        pooled_f1: pooled_f1(&cm),
        accuracy: cm.accuracy(),
        confusion: cm,
        per_class,
        macro_f1,
        micro_f1,
    })
}
