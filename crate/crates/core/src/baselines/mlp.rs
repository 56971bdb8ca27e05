use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};
use crate::nn::{self, Activation, LayerSpec, Loss, MlpModel, ModelFile, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpBaselineConfig {
    pub hidden: usize,
    pub train: TrainConfig,
}

impl Default for MlpBaselineConfig {
    fn default() -> Self {
        MlpBaselineConfig {
            hidden: 100,
            train: TrainConfig {
                loss: Loss::CrossEntropy,
                max_epochs: 50,
                ..TrainConfig::default()
            },
        }
    }
}

/// Dense ReLU hidden layer into a softmax over the classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct MlpBaseline {
    pub model: MlpModel,
}

impl From<MlpBaseline> for ModelFile {
    fn from(m: MlpBaseline) -> Self {
        m.model.to_file()
    }
}

impl TryFrom<ModelFile> for MlpBaseline {
    type Error = IdsError;
    fn try_from(file: ModelFile) -> Result<Self> {
        Ok(MlpBaseline {
            model: MlpModel::from_file(file)?,
        })
    }
}

pub fn fit_mlp(x: &Array2<f64>, labels: &[usize], k: usize, cfg: &MlpBaselineConfig) -> Result<MlpBaseline> {
    if cfg.hidden == 0 {
        return Err(IdsError::Config("hidden width must be >= 1".into()));
    }
    if x.nrows() != labels.len() {
        return Err(IdsError::Shape("one label per row required".into()));
    }
    let specs = [
        LayerSpec::dense(x.ncols(), cfg.hidden, Activation::Relu),
        LayerSpec::dense(cfg.hidden, k, Activation::Softmax),
    ];
    let mut rng = crate::rng_from_seed(cfg.train.seed);
    let init = MlpModel::new(&specs, &mut rng)?;
    let train_cfg = TrainConfig {
        loss: Loss::CrossEntropy,
        ..cfg.train.clone()
    };
    let (model, _) = nn::train(&init, x, &nn::one_hot(labels, k), &train_cfg)?;
    Ok(MlpBaseline { model })
}

impl MlpBaseline {
    pub fn predict_batch(&self, x: &Array2<f64>) -> Result<Vec<usize>> {
        let probs = self.model.predict(x)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|r| nn::argmax(r.as_slice().expect("row-major output")))
            .collect())
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> usize {
        let batch = row.to_owned().insert_axis(Axis(0));
        self.predict_batch(&batch).map(|v| v[0]).unwrap_or(0)
    }
}
