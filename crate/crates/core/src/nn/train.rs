use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Activation, AdamState, Loss, MlpModel, Mode, OutputGrad};
use crate::error::{IdsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub val_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            val_fraction: 0.15,
            patience: 6,
            max_epochs: 200,
            learning_rate: AdamState::DEFAULT_LEARNING_RATE,
            seed: 0,
            loss: Loss::Mse,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(IdsError::Config("batch_size must be >= 1".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(IdsError::Config(format!(
                "val_fraction {} outside (0, 1)",
                self.val_fraction
            )));
        }
        if self.patience == 0 {
            return Err(IdsError::Config("patience must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(IdsError::Config("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Patience-based stopping rule on a loss that should decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: Option<usize>,
    wait: usize,
    epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: None,
            wait: 0,
            epoch: 0,
        }
    }

    pub fn observe(&mut self, loss: f64) -> StopDecision {
        let epoch = self.epoch;
        self.epoch += 1;
        if loss < self.best {
            self.best = loss;
            self.best_epoch = Some(epoch);
            self.wait = 0;
            return StopDecision::Improved;
        }
        self.wait += 1;
        if self.wait >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Losses of the untrained model.
    pub initial_train_loss: f64,
    pub initial_val_loss: f64,
    /// Mean training-mode batch loss per epoch.
    pub train_loss: Vec<f64>,
    /// Inference-mode validation loss per epoch.
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl History {
    pub fn epochs(&self) -> usize {
        self.val_loss.len()
    }

    pub fn best_val_loss(&self) -> f64 {
        self.val_loss
            .get(self.best_epoch)
            .copied()
            .unwrap_or(self.initial_val_loss)
    }
}

/// Inference-mode loss over a whole matrix.
pub fn evaluate_loss(model: &MlpModel, x: &Array2<f64>, y: &Array2<f64>, loss: Loss) -> Result<f64> {
    let pred = model.predict(x)?;
    Ok(loss.evaluate(pred.view(), y.view())?.0)
}

const SPLIT_STREAM: u64 = 0x5eed_0001;

/// Shuffled hold-out split: returns (train indices, validation indices).
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_val = ((n as f64) * val_fraction).round() as usize;
    if n_val == 0 || n_val >= n {
        return Err(IdsError::InvalidInput(format!(
            "cannot hold out {val_fraction} of {n} rows for validation"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut crate::rng_from_seed(seed ^ SPLIT_STREAM));
    let val = idx.split_off(n - n_val);
    Ok((idx, val))
}

fn uses_fused_softmax(model: &MlpModel, loss: Loss) -> bool {
    loss == Loss::CrossEntropy && model.layers().last().map(|l| l.spec.activation) == Some(Activation::Softmax)
}

/// Mini-batch Adam training against an explicit validation set. Stops
/// after `patience` epochs without validation improvement and returns
/// the parameters of the best validation epoch.
pub fn fit(
    model: &MlpModel,
    train_x: &Array2<f64>,
    train_y: &Array2<f64>,
    val_x: &Array2<f64>,
    val_y: &Array2<f64>,
    cfg: &TrainConfig,
) -> Result<(MlpModel, History)> {
    cfg.validate()?;
    if train_x.nrows() == 0 || val_x.nrows() == 0 {
        return Err(IdsError::InvalidInput(
            "training and validation sets must be non-empty".into(),
        ));
    }
    if train_x.nrows() != train_y.nrows() || val_x.nrows() != val_y.nrows() {
        return Err(IdsError::Shape("inputs and targets are not row-aligned".into()));
    }
    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut model = model.clone();
    model.set_mode(Mode::Train);
    let fused = uses_fused_softmax(&model, cfg.loss);
    let mut adam = AdamState::for_model(&model, cfg.learning_rate);

    let mut history = History {
        initial_train_loss: evaluate_loss(&model, train_x, train_y, cfg.loss)?,
        initial_val_loss: evaluate_loss(&model, val_x, val_y, cfg.loss)?,
        ..History::default()
    };
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = model.clone();
    let mut order: Vec<usize> = (0..train_x.nrows()).collect();

    for _epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = train_x.select(Axis(0), chunk);
            let yb = train_y.select(Axis(0), chunk);
            let cache = model.forward(&xb, &mut rng)?;
            let (value, grad) = cfg.loss.evaluate(cache.output().view(), yb.view())?;
            let seed = if fused {
                OutputGrad::Logits(Loss::fused_softmax_grad(cache.output().view(), yb.view()))
            } else {
                OutputGrad::Activations(grad)
            };
            let grads = model.backward(&cache, seed)?;
            adam.step_model(&mut model, &grads)?;
            total += value;
            batches += 1;
        }
        history.train_loss.push(total / batches as f64);
        let val = evaluate_loss(&model, val_x, val_y, cfg.loss)?;
        if !val.is_finite() {
            return Err(IdsError::InvalidInput("validation loss diverged".into()));
        }
        history.val_loss.push(val);
        match stopper.observe(val) {
            StopDecision::Improved => best = model.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => {
                history.stopped_early = true;
                break;
            }
        }
    }
    history.best_epoch = stopper.best_epoch().unwrap_or(0);
    best.set_mode(Mode::Infer);
    Ok((best, history))
}

/// Holds out `cfg.val_fraction` of the rows for validation, then [`fit`]s.
pub fn train(model: &MlpModel, x: &Array2<f64>, y: &Array2<f64>, cfg: &TrainConfig) -> Result<(MlpModel, History)> {
    cfg.validate()?;
    if x.nrows() == 0 {
        return Err(IdsError::InvalidInput("no training rows".into()));
    }
    if x.nrows() != y.nrows() {
        return Err(IdsError::Shape("inputs and targets are not row-aligned".into()));
    }
    let (tr, va) = split_indices(x.nrows(), cfg.val_fraction, cfg.seed)?;
    fit(
        model,
        &x.select(Axis(0), &tr),
        &y.select(Axis(0), &tr),
        &x.select(Axis(0), &va),
        &y.select(Axis(0), &va),
        cfg,
    )
}
