//! Minimal dense network engine: ReLU/SeLU/softmax/identity layers with
//! optional input noise and inverted dropout, MSE and cross-entropy
//! losses, backpropagation, Adam, and an early-stopped mini-batch loop.

mod activation;
mod adam;
mod loss;
mod model;
mod train;

pub use activation::{activation, Activation, SELU_ALPHA, SELU_LAMBDA};
pub use adam::AdamState;
pub use loss::{loss, Loss, LOG_CLAMP};
pub use model::{ForwardCache, Gradients, Layer, LayerFile, LayerSpec, MlpModel, Mode, ModelFile, OutputGrad};
pub use train::{evaluate_loss, fit, split_indices, train, EarlyStopping, History, StopDecision, TrainConfig};

/// One-hot encode class indices into an `n x k` matrix.
pub fn one_hot(indices: &[usize], k: usize) -> ndarray::Array2<f64> {
    let mut out = ndarray::Array2::zeros((indices.len(), k));
    for (i, &c) in indices.iter().enumerate() {
        out[[i, c]] = 1.0;
    }
    out
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
