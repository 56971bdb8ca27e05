//! Stage two: a dense softmax network over the four attack categories,
//! optionally trained on SVM-SMOTE oversampled rows.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{category_counts, Category};
use crate::error::{IdsError, Result};
use crate::metrics::{confusion, multiclass_report, MulticlassReport};
use crate::nn::{self, Activation, History, LayerSpec, Loss, MlpModel, ModelFile, TrainConfig};
use crate::preprocess::FeatureMatrix;
use crate::resample::{svm_smote, ClassLog, SvmSmoteConfig};

pub const CLASS_ORDER: [Category; 4] = Category::ATTACKS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DnnConfig {
    pub hidden_dim: usize,
    pub train: TrainConfig,
}

impl Default for DnnConfig {
    fn default() -> Self {
        DnnConfig {
            hidden_dim: 80,
            train: TrainConfig {
                loss: Loss::CrossEntropy,
                ..TrainConfig::default()
            },
        }
    }
}

impl DnnConfig {
    pub fn layer_specs(&self, input_dim: usize) -> [LayerSpec; 2] {
        [
            LayerSpec::dense(input_dim, self.hidden_dim, Activation::Relu),
            LayerSpec::dense(self.hidden_dim, CLASS_ORDER.len(), Activation::Softmax),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackClassifier {
    pub model: MlpModel,
    pub trained_with_oversampling: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub category: Category,
    pub probabilities: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainingReport {
    pub oversampled: bool,
    /// Rows per class actually fed to the optimizer.
    pub train_counts: BTreeMap<Category, usize>,
    pub validation_rows: usize,
    pub synthetic_rows: usize,
    pub resample_log: Vec<ClassLog>,
    pub history: History,
}

fn class_indices(cats: &[Category]) -> Result<Vec<usize>> {
    cats.iter()
        .map(|c| {
            c.attack_index()
                .ok_or_else(|| IdsError::InvalidInput("four-class data contains normal rows".into()))
        })
        .collect()
}

/// Splits off a validation part first, then oversamples (if asked) only
/// the training part before fitting.
pub fn train_fourclass(
    attacks: &FeatureMatrix,
    oversample: Option<&SvmSmoteConfig>,
    cfg: &DnnConfig,
) -> Result<(AttackClassifier, ClassifierTrainingReport)> {
    class_indices(attacks.categories())?;
    let counts = category_counts(attacks.categories());
    let missing: Vec<&str> = CLASS_ORDER
        .iter()
        .filter(|c| !counts.contains_key(c))
        .map(|c| c.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(IdsError::InvalidInput(format!(
            "training data lacks attack categories: {}",
            missing.join(", ")
        )));
    }
    if cfg.hidden_dim == 0 {
        return Err(IdsError::Config("hidden_dim must be >= 1".into()));
    }
    let (tr, va) = nn::split_indices(attacks.nrows(), cfg.train.val_fraction, cfg.train.seed)?;
    let train_part = attacks.select(&tr);
    let val_part = attacks.select(&va);

    let (train_part, resample_log, synthetic_rows) = match oversample {
        Some(sc) => {
            let set = svm_smote(&train_part, sc)?;
            let n = set.n_synthetic();
            (set.matrix, set.log, n)
        }
        None => (train_part, Vec::new(), 0),
    };
    let y_train = nn::one_hot(&class_indices(train_part.categories())?, CLASS_ORDER.len());
    let y_val = nn::one_hot(&class_indices(val_part.categories())?, CLASS_ORDER.len());

    let mut rng = crate::rng_from_seed(cfg.train.seed);
    let init = MlpModel::new(&cfg.layer_specs(attacks.ncols()), &mut rng)?;
    let tcfg = TrainConfig {
        loss: Loss::CrossEntropy,
        ..cfg.train.clone()
    };
    let (model, history) = nn::fit(&init, train_part.values(), &y_train, val_part.values(), &y_val, &tcfg)?;
    log::info!(
        "classifier ({}): {} epochs, best val loss {:.6}",
        if oversample.is_some() { "oversampled" } else { "plain" },
        history.epochs(),
        history.best_val_loss()
    );
    Ok((
        AttackClassifier {
            model,
            trained_with_oversampling: oversample.is_some(),
        },
        ClassifierTrainingReport {
            oversampled: oversample.is_some(),
            train_counts: category_counts(train_part.categories()),
            validation_rows: val_part.nrows(),
            synthetic_rows,
            resample_log,
            history,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassifierFile {
    format_version: u32,
    class_order: Vec<Category>,
    trained_with_oversampling: bool,
    model: ModelFile,
}

impl AttackClassifier {
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<Prediction>> {
        let probs = self.model.predict(x)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|r| {
                let p = [r[0], r[1], r[2], r[3]];
                Prediction {
                    category: CLASS_ORDER[nn::argmax(&p)],
                    probabilities: p,
                }
            })
            .collect())
    }

    pub fn predict_categories(&self, x: &Array2<f64>) -> Result<Vec<Category>> {
        Ok(self.predict(x)?.into_iter().map(|p| p.category).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ClassifierFile {
            format_version: crate::FORMAT_VERSION,
            class_order: CLASS_ORDER.to_vec(),
            trained_with_oversampling: self.trained_with_oversampling,
            model: self.model.to_file(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ClassifierFile = serde_json::from_str(text)?;
        crate::check_version("classifier", file.format_version)?;
        if file.class_order != CLASS_ORDER {
            return Err(IdsError::InvalidInput(format!(
                "classifier class order {:?} differs from {:?}",
                file.class_order, CLASS_ORDER
            )));
        }
        let mut model = MlpModel::from_file(file.model)?;
        if model.output_dim() != CLASS_ORDER.len() {
            return Err(IdsError::Shape("classifier must have four outputs".into()));
        }
        model.set_mode(nn::Mode::Infer);
        Ok(AttackClassifier {
            model,
            trained_with_oversampling: file.trained_with_oversampling,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| IdsError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        AttackClassifier::from_json(&text)
    }
}

/// Confusion matrix in DoS/Probe/R2L/U2R order with F1 summaries.
pub fn evaluate_fourclass(classifier: &AttackClassifier, test: &FeatureMatrix) -> Result<MulticlassReport> {
    class_indices(test.categories())?;
    let pred = classifier.predict_categories(test.values())?;
    multiclass_report(confusion(test.categories(), &pred, &CLASS_ORDER)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn blobs(counts: [usize; 4], d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = crate::rng_from_seed(seed);
        let mut vals = Vec::new();
        let mut cats = Vec::new();
        for (ci, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                for j in 0..d {
                    let centre = if j % 4 == ci { 3.0 } else { 0.0 };
                    vals.push(centre + 0.5 * rng.sample::<f64, _>(StandardNormal));
                }
                cats.push(CLASS_ORDER[ci]);
            }
        }
        FeatureMatrix::new(
            Array2::from_shape_vec((cats.len(), d), vals).unwrap(),
            cats,
            Split::Train,
        )
        .unwrap()
    }

    fn quick() -> DnnConfig {
        let mut cfg = DnnConfig {
            hidden_dim: 12,
            ..DnnConfig::default()
        };
        cfg.train.max_epochs = 40;
        cfg.train.learning_rate = 0.01;
        cfg.train.seed = 2;
        cfg
    }

    #[test]
    fn separable_blobs_train_well() {
        let data = blobs([60, 40, 30, 20], 8, 1);
        let (clf, rep) = train_fourclass(&data, None, &quick()).unwrap();
        assert!(!clf.trained_with_oversampling);
        let report = evaluate_fourclass(&clf, &data).unwrap();
        assert!(report.accuracy > 0.9, "{}", report.accuracy);
        assert_eq!(report.confusion.total(), 150);
        assert_eq!(rep.validation_rows, 23);
        let again = train_fourclass(&data, None, &quick()).unwrap().0;
        assert_eq!(
            again.predict(data.values()).unwrap(),
            clf.predict(data.values()).unwrap()
        );
    }

    #[test]
    fn oversampling_equalizes_training_counts() {
        let data = blobs([80, 30, 10, 5], 8, 3);
        let (clf, rep) = train_fourclass(&data, Some(&SvmSmoteConfig::default()), &quick()).unwrap();
        assert!(clf.trained_with_oversampling);
        let counts: Vec<usize> = rep.train_counts.values().copied().collect();
        assert_eq!(counts.len(), 4);
        assert!(counts.iter().all(|&c| c == counts[0]), "{counts:?}");
        assert!(rep.synthetic_rows > 0);
        // validation rows are never synthetic
        assert_eq!(rep.validation_rows, 19);
    }

    #[test]
    fn missing_class_and_normal_rows_are_errors() {
        let data = blobs([20, 20, 20, 0], 4, 5);
        let err = train_fourclass(&data, None, &quick()).unwrap_err().to_string();
        assert!(err.contains("U2R"), "{err}");
        let normals = FeatureMatrix::new(Array2::zeros((2, 4)), vec![Category::Normal; 2], Split::Train).unwrap();
        assert!(train_fourclass(&normals, None, &quick()).is_err());
    }

    fn constant_model(logits: [f64; 4]) -> AttackClassifier {
        let layer = crate::nn::Layer {
            spec: LayerSpec::dense(2, 4, Activation::Softmax),
            weights: Array2::zeros((4, 2)),
            bias: Array1::from(logits.to_vec()),
        };
        AttackClassifier {
            model: MlpModel::from_layers(vec![layer]).unwrap(),
            trained_with_oversampling: false,
        }
    }

    #[test]
    fn uniform_probabilities_pick_dos() {
        let clf = constant_model([0.0; 4]);
        let p = clf.predict(&Array2::zeros((1, 2))).unwrap();
        assert_eq!(p[0].category, Category::DoS);
        assert_abs_diff_eq!(p[0].probabilities[3], 0.25, epsilon = 1e-15);
        let clf = constant_model([0.0, 0.0, 0.0, 2.0]);
        assert_eq!(clf.predict(&Array2::zeros((1, 2))).unwrap()[0].category, Category::U2R);
        assert!(clf.predict(&Array2::zeros((1, 3))).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let data = blobs([20, 20, 20, 20], 5, 7);
        let (clf, _) = train_fourclass(&data, None, &quick()).unwrap();
        let mut rng = crate::rng_from_seed(8);
        let x = Array2::from_shape_fn((200, 5), |_| 5.0 * rng.sample::<f64, _>(StandardNormal));
        for p in clf.predict(&x).unwrap() {
            assert_abs_diff_eq!(p.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn file_round_trip_and_class_order_guard() {
        let data = blobs([20, 20, 20, 20], 5, 9);
        let (clf, _) = train_fourclass(&data, None, &quick()).unwrap();
        let json = clf.to_json().unwrap();
        let back = AttackClassifier::from_json(&json).unwrap();
        assert_eq!(
            back.predict(data.values()).unwrap(),
            clf.predict(data.values()).unwrap()
        );
        let swapped = json.replacen("\"DoS\",\n    \"Probe\"", "\"Probe\",\n    \"DoS\"", 1);
        assert_ne!(swapped, json);
        assert!(AttackClassifier::from_json(&swapped).is_err());
    }

    #[test]
    fn perfect_predictions_give_unit_f1() {
        let cats = CLASS_ORDER.to_vec();
        let r = multiclass_report(confusion(&cats, &cats, &CLASS_ORDER).unwrap()).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert!(r.per_class.iter().all(|c| c.f1 == 1.0));
    }
}
