use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class feature means and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

pub fn fit_gnb(x: &Array2<f64>, labels: &[usize], k: usize) -> Result<GaussianNb> {
    if x.nrows() != labels.len() || x.nrows() == 0 {
        return Err(IdsError::Shape("need one label per row and at least one row".into()));
    }
    let d = x.ncols();
    let mut counts = vec![0usize; k];
    let mut means = vec![vec![0.0; d]; k];
    for (row, &c) in x.rows().into_iter().zip(labels) {
        if c >= k {
            return Err(IdsError::InvalidInput(format!("label {c} outside 0..{k}")));
        }
        counts[c] += 1;
        for j in 0..d {
            means[c][j] += row[j];
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(IdsError::InvalidInput(format!("class {c} has no rows")));
    }
    for c in 0..k {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    let mut variances = vec![vec![0.0; d]; k];
    for (row, &c) in x.rows().into_iter().zip(labels) {
        for j in 0..d {
            let diff = row[j] - means[c][j];
            variances[c][j] += diff * diff;
        }
    }
    for c in 0..k {
        variances[c]
            .iter_mut()
            .for_each(|v| *v = (*v / counts[c] as f64).max(VARIANCE_FLOOR));
    }
    let n = x.nrows() as f64;
    Ok(GaussianNb {
        log_priors: counts.iter().map(|&c| (c as f64 / n).ln()).collect(),
        means,
        variances,
    })
}

impl GaussianNb {
    pub fn log_posteriors(&self, row: ArrayView1<f64>) -> Vec<f64> {
        (0..self.log_priors.len())
            .map(|c| {
                let mut ll = self.log_priors[c];
                for j in 0..row.len() {
                    let var = self.variances[c][j];
                    let diff = row[j] - self.means[c][j];
                    ll -= 0.5 * (2.0 * std::f64::consts::PI * var).ln() + diff * diff / (2.0 * var);
                }
                ll
            })
            .collect()
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        crate::nn::argmax(&self.log_posteriors(row))
    }
}
