//! Stage one: an autoencoder trained on normal traffic. Rows whose
//! reconstruction error exceeds the calibrated threshold are attacks.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryLabel, Category};
use crate::error::{IdsError, Result};
use crate::nn::{self, Activation, History, LayerSpec, Loss, MlpModel, ModelFile, TrainConfig};
use crate::preprocess::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    /// Gaussian noise added to the input in training mode.
    pub noise_sigma: f64,
    /// Dropout on the encoder input in training mode.
    pub dropout: f64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            input_dim: crate::dataset::N_FEATURES,
            hidden_dim: 15,
            activation: Activation::Selu,
            noise_sigma: 0.15,
            dropout: 0.05,
        }
    }
}

impl AutoencoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.hidden_dim >= self.input_dim {
            return Err(IdsError::Config(format!(
                "hidden_dim {} must be in 1..{}",
                self.hidden_dim, self.input_dim
            )));
        }
        Ok(())
    }

    pub fn layer_specs(&self) -> [LayerSpec; 2] {
        [
            LayerSpec::dense(self.input_dim, self.hidden_dim, self.activation)
                .with_noise(self.noise_sigma)
                .with_dropout(self.dropout),
            LayerSpec::dense(self.hidden_dim, self.input_dim, Activation::Identity),
        ]
    }
}

/// Threshold selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Calibration {
    /// Nearest-rank quantile of held-out normal errors.
    Quantile { q: f64 },
    /// Observed error maximizing attack F1 on a labeled mixed set.
    LabeledF1,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration::Quantile { q: 0.95 }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Calibration::Quantile { q } => write!(f, "quantile:{q}"),
            Calibration::LabeledF1 => f.write_str("labeled-f1"),
        }
    }
}

impl FromStr for Calibration {
    type Err = IdsError;

    /// Accepts `quantile`, `quantile:<q>` and `labeled-f1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || IdsError::Config(format!("bad calibration '{s}'; expected quantile:<q> or labeled-f1"));
        match s.split_once(':') {
            None if s == "quantile" => Ok(Calibration::default()),
            None if s == "labeled-f1" || s == "labeled_f1" => Ok(Calibration::LabeledF1),
            Some(("quantile", q)) => {
                let q: f64 = q.parse().map_err(|_| bad())?;
                if !(q > 0.0 && q <= 1.0) {
                    return Err(IdsError::Config(format!("quantile {q} outside (0, 1]")));
                }
                Ok(Calibration::Quantile { q })
            }
            _ => Err(bad()),
        }
    }
}

/// Training and calibration settings for [`fit_detector`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub autoencoder: AutoencoderConfig,
    pub train: TrainConfig,
    pub calibration: Calibration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyDetector {
    pub model: MlpModel,
    pub alpha: f64,
    pub calibration: Calibration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub row_index: usize,
    pub reconstruction_error: f64,
    pub verdict: BinaryLabel,
}

/// Verdict rule: strictly above the threshold is an attack.
pub fn verdict(error: f64, alpha: f64) -> BinaryLabel {
    if error > alpha {
        BinaryLabel::Attack
    } else {
        BinaryLabel::Normal
    }
}

/// Autoencoder fit on normal rows only, with the clean input as target.
/// `train` holds out `tcfg.val_fraction` of the rows for early stopping.
pub fn train_on_normal(
    normals: &FeatureMatrix,
    cfg: &AutoencoderConfig,
    tcfg: &TrainConfig,
) -> Result<(MlpModel, History)> {
    if normals.categories().iter().any(|c| c.is_attack()) {
        return Err(IdsError::InvalidInput(
            "autoencoder training rows must all be normal".into(),
        ));
    }
    let (tr, va) = nn::split_indices(normals.nrows(), tcfg.val_fraction, tcfg.seed)?;
    let x = normals.values();
    fit_autoencoder(&x.select(Axis(0), &tr), &x.select(Axis(0), &va), cfg, tcfg)
}

fn fit_autoencoder(
    train: &Array2<f64>,
    val: &Array2<f64>,
    cfg: &AutoencoderConfig,
    tcfg: &TrainConfig,
) -> Result<(MlpModel, History)> {
    cfg.validate()?;
    if train.ncols() != cfg.input_dim {
        return Err(IdsError::Shape(format!(
            "feature width {} but autoencoder expects {}",
            train.ncols(),
            cfg.input_dim
        )));
    }
    let mut rng = crate::rng_from_seed(tcfg.seed);
    let init = MlpModel::new(&cfg.layer_specs(), &mut rng)?;
    let tcfg = TrainConfig {
        loss: Loss::Mse,
        ..tcfg.clone()
    };
    nn::fit(&init, train, train, val, val, &tcfg)
}

const SCORE_CHUNK: usize = 2048;

/// Squared Euclidean reconstruction error per row, in inference mode.
pub fn reconstruction_errors(model: &MlpModel, x: &Array2<f64>) -> Result<Vec<f64>> {
    if x.ncols() != model.input_dim() {
        return Err(IdsError::Shape(format!(
            "row width {} but model expects {}",
            x.ncols(),
            model.input_dim()
        )));
    }
    let starts: Vec<usize> = (0..x.nrows()).step_by(SCORE_CHUNK).collect();
    let chunks: Vec<Vec<f64>> = starts
        .into_par_iter()
        .map(|start| {
            let end = (start + SCORE_CHUNK).min(x.nrows());
            let chunk = x.slice(ndarray::s![start..end, ..]).to_owned();
            let recon = model.predict(&chunk)?;
            Ok(chunk
                .rows()
                .into_iter()
                .zip(recon.rows())
                .map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.concat())
}

pub fn reconstruction_error(model: &MlpModel, row: &[f64]) -> Result<f64> {
    let x = Array2::from_shape_vec((1, row.len()), row.to_vec()).map_err(|e| IdsError::Shape(e.to_string()))?;
    Ok(reconstruction_errors(model, &x)?[0])
}

/// Nearest-rank quantile: the `ceil(q n)`-th smallest value.
pub fn quantile_threshold(errors: &[f64], q: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(IdsError::InvalidInput("no validation errors to calibrate on".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(IdsError::Config(format!("quantile {q} outside (0, 1]")));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    // tolerance keeps e.g. 0.95 * 100 from rounding up to rank 96
    let rank = ((q * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Sweeps every observed error as a candidate threshold and returns the
/// one with the best attack F1 (smallest on ties) with that F1.
pub fn labeled_f1_threshold(errors: &[f64], is_attack: &[bool]) -> Result<(f64, f64)> {
    if errors.len() != is_attack.len() {
        return Err(IdsError::Shape("one label per error required".into()));
    }
    let attacks = is_attack.iter().filter(|&&a| a).count();
    if attacks == 0 || attacks == errors.len() {
        return Err(IdsError::InvalidInput(
            "labeled-f1 calibration needs both normal and attack rows".into(),
        ));
    }
    let mut pairs: Vec<(f64, bool)> = errors.iter().copied().zip(is_attack.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // rows at or below the candidate are predicted normal
    let (mut below_attack, mut below_normal) = (0usize, 0usize);
    let mut best = (f64::NAN, -1.0);
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == v {
            if pairs[i].1 {
                below_attack += 1;
            } else {
                below_normal += 1;
            }
            i += 1;
        }
        let tp = attacks - below_attack;
        let fp = (pairs.len() - attacks) - below_normal;
        let f1 = if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + below_attack) as f64
        };
        if f1 > best.1 {
            best = (v, f1);
        }
    }
    Ok(best)
}

/// What a calibration run saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub calibration: Calibration,
    pub alpha: f64,
    pub validation_normals: usize,
    pub validation_attacks: usize,
    /// Attack F1 on the calibration set at the chosen alpha.
    pub validation_f1: Option<f64>,
}

/// Threshold from a normal validation set and, for labeled-F1, attack rows.
pub fn calibrate_threshold(
    model: &MlpModel,
    validation_normals: &Array2<f64>,
    validation_attacks: Option<&Array2<f64>>,
    method: Calibration,
) -> Result<CalibrationReport> {
    let normal_err = reconstruction_errors(model, validation_normals)?;
    let (alpha, validation_f1, n_attacks) = match method {
        Calibration::Quantile { q } => (quantile_threshold(&normal_err, q)?, None, 0),
        Calibration::LabeledF1 => {
            let attacks = validation_attacks
                .filter(|a| a.nrows() > 0)
                .ok_or_else(|| IdsError::InvalidInput("labeled-f1 calibration needs attack rows".into()))?;
            let attack_err = reconstruction_errors(model, attacks)?;
            let mut labels = vec![false; normal_err.len()];
            labels.resize(normal_err.len() + attack_err.len(), true);
            let all = [normal_err.as_slice(), attack_err.as_slice()].concat();
            let (alpha, f1) = labeled_f1_threshold(&all, &labels)?;
            (alpha, Some(f1), attack_err.len())
        }
    };
    if !(alpha > 0.0) {
        return Err(IdsError::InvalidInput(format!(
            "calibrated threshold {alpha} is not positive"
        )));
    }
    Ok(CalibrationReport {
        calibration: method,
        alpha,
        validation_normals: normal_err.len(),
        validation_attacks: n_attacks,
        validation_f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorTrainingReport {
    pub normal_rows: usize,
    pub history: History,
    pub calibration: CalibrationReport,
}

/// Full stage-one fit: normals are split into train and validation parts;
/// the validation part drives early stopping and calibration. Labeled-F1
/// calibration also holds out the same fraction of training attacks.
pub fn fit_detector(train: &FeatureMatrix, cfg: &DetectorConfig) -> Result<(AnomalyDetector, DetectorTrainingReport)> {
    let normals = train.filter(|c| c == Category::Normal);
    if normals.is_empty() {
        return Err(IdsError::InvalidInput("training data has no normal rows".into()));
    }
    let frac = cfg.train.val_fraction;
    let (tr, va) = nn::split_indices(normals.nrows(), frac, cfg.train.seed)?;
    let x = normals.values();
    let val_normals = x.select(Axis(0), &va);
    let (model, history) = fit_autoencoder(&x.select(Axis(0), &tr), &val_normals, &cfg.autoencoder, &cfg.train)?;

    let val_attacks = match cfg.calibration {
        Calibration::LabeledF1 => {
            let attacks = train.filter(|c| c.is_attack());
            if attacks.nrows() < 2 {
                return Err(IdsError::InvalidInput(
                    "labeled-f1 calibration needs attack rows in the training data".into(),
                ));
            }
            let (_, held) = nn::split_indices(attacks.nrows(), frac, cfg.train.seed ^ 0xA77A)?;
            Some(attacks.values().select(Axis(0), &held))
        }
        Calibration::Quantile { .. } => None,
    };
    let calibration = calibrate_threshold(&model, &val_normals, val_attacks.as_ref(), cfg.calibration)?;
    log::info!(
        "detector: {} epochs, best val loss {:.6}, alpha {:.6} ({})",
        history.epochs(),
        history.best_val_loss(),
        calibration.alpha,
        cfg.calibration
    );
    let detector = AnomalyDetector::new(model, calibration.alpha, cfg.calibration)?;
    Ok((
        detector,
        DetectorTrainingReport {
            normal_rows: normals.nrows(),
            history,
            calibration,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DetectorFile {
    format_version: u32,
    model: ModelFile,
    alpha: f64,
    calibration: Calibration,
}

impl AnomalyDetector {
    pub fn new(mut model: MlpModel, alpha: f64, calibration: Calibration) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(IdsError::InvalidInput(format!("alpha {alpha} must be positive")));
        }
        model.set_mode(nn::Mode::Infer);
        Ok(AnomalyDetector {
            model,
            alpha,
            calibration,
        })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        AnomalyDetector::new(self.model.clone(), alpha, self.calibration)
    }

    pub fn detect(&self, x: &Array2<f64>) -> Result<Vec<ScoredSample>> {
        let errors = reconstruction_errors(&self.model, x)?;
        Ok(errors
            .into_iter()
            .enumerate()
            .map(|(row_index, e)| ScoredSample {
                row_index,
                reconstruction_error: e,
                verdict: verdict(e, self.alpha),
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DetectorFile {
            format_version: crate::FORMAT_VERSION,
            model: self.model.to_file(),
            alpha: self.alpha,
            calibration: self.calibration,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DetectorFile = serde_json::from_str(text)?;
        crate::check_version("detector", file.format_version)?;
        AnomalyDetector::new(MlpModel::from_file(file.model)?, file.alpha, file.calibration)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| IdsError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        AnomalyDetector::from_json(&text)
    }
}

/// `row_index,reconstruction_error,verdict` CSV.
pub fn scores_to_csv(scores: &[ScoredSample]) -> String {
    let mut out = String::from("row_index,reconstruction_error,verdict\n");
    for s in scores {
        let v = match s.verdict {
            BinaryLabel::Normal => "normal",
            BinaryLabel::Attack => "attack",
        };
        let _ = writeln!(out, "{},{},{}", s.row_index, s.reconstruction_error, v);
    }
    out
}
