use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{IdsError, Result};

/// Shape and regularization of one dense layer. Noise and dropout act on
/// the layer's input, in training mode only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

impl LayerSpec {
    pub fn dense(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
            dropout_rate: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout_rate = rate;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(IdsError::Config("layer dimensions must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(IdsError::Config(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(IdsError::Config(format!(
                "noise sigma {} must be >= 0",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    /// out_dim x in_dim
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    mode: Mode,
    generation: u64,
}

/// Activations recorded by a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    /// Effective input of each layer, after noise and dropout.
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
    /// Scaled dropout masks (0 or 1/(1-p)) per layer, when dropout was applied.
    masks: Vec<Option<Array2<f64>>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.post.last().expect("model has at least one layer")
    }

    pub fn dropout_mask(&self, layer: usize) -> Option<&Array2<f64>> {
        self.masks[layer].as_ref()
    }
}

/// Gradient seed for `backward`.
pub enum OutputGrad {
    /// Gradient with respect to the final activation output.
    Activations(Array2<f64>),
    /// Gradient with respect to the final pre-activation (fused softmax +
    /// cross-entropy).
    Logits(Array2<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|&v| v == 0.0))
            && self.biases.iter().all(|b| b.iter().all(|&v| v == 0.0))
    }
}

fn init_weights(spec: &LayerSpec, rng: &mut impl Rng) -> Array2<f64> {
    let (fan_in, fan_out) = (spec.in_dim as f64, spec.out_dim as f64);
    let shape = (spec.out_dim, spec.in_dim);
    match spec.activation {
        Activation::Relu => {
            let limit = (6.0 / fan_in).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            Array2::from_shape_simple_fn(shape, || dist.sample(rng))
        }
        Activation::Selu => {
            let dist = Normal::new(0.0, (1.0 / fan_in).sqrt()).expect("finite std");
            Array2::from_shape_simple_fn(shape, || dist.sample(rng))
        }
        Activation::Softmax | Activation::Identity => {
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            Array2::from_shape_simple_fn(shape, || dist.sample(rng))
        }
    }
}

impl MlpModel {
    /// Builds a model with He-uniform (ReLU), LeCun-normal (SeLU) or
    /// Glorot-uniform (otherwise) weights and zero biases.
    pub fn new(specs: &[LayerSpec], rng: &mut impl Rng) -> Result<Self> {
        if specs.is_empty() {
            return Err(IdsError::Config("a model needs at least one layer".into()));
        }
        for s in specs {
            s.validate()?;
        }
        for w in specs.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(IdsError::Config(format!(
                    "layer output {} does not feed next layer input {}",
                    w[0].out_dim, w[1].in_dim
                )));
            }
        }
        let layers = specs
            .iter()
            .map(|s| Layer {
                spec: *s,
                weights: init_weights(s, rng),
                bias: Array1::zeros(s.out_dim),
            })
            .collect();
        Ok(MlpModel {
            layers,
            mode: Mode::Infer,
            generation: 0,
        })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec).collect();
        for (l, s) in layers.iter().zip(&specs) {
            s.validate()?;
            if l.weights.dim() != (s.out_dim, s.in_dim) || l.bias.len() != s.out_dim {
                return Err(IdsError::Shape("layer parameters disagree with spec".into()));
            }
        }
        for w in specs.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(IdsError::Shape("adjacent layer dimensions do not chain".into()));
            }
        }
        if layers.is_empty() {
            return Err(IdsError::Config("a model needs at least one layer".into()));
        }
        Ok(MlpModel {
            layers,
            mode: Mode::Infer,
            generation: 0,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().spec.out_dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Forward pass. In training mode each layer input receives additive
    /// Gaussian noise and then inverted dropout, drawn from `rng`.
    pub fn forward(&self, batch: &Array2<f64>, rng: &mut impl Rng) -> Result<ForwardCache> {
        if batch.ncols() != self.input_dim() {
            return Err(IdsError::Shape(format!(
                "batch width {} but model expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        let n = self.layers.len();
        let mut cache = ForwardCache {
            generation: self.generation,
            inputs: Vec::with_capacity(n),
            pre: Vec::with_capacity(n),
            post: Vec::with_capacity(n),
            masks: Vec::with_capacity(n),
        };
        let mut current = batch.clone();
        for layer in &self.layers {
            let mut mask = None;
            if self.mode == Mode::Train {
                if layer.spec.noise_sigma > 0.0 {
                    let sigma = layer.spec.noise_sigma;
                    current.mapv_inplace(|v| {
                        let e: f64 = StandardNormal.sample(rng);
                        v + sigma * e
                    });
                }
                if layer.spec.dropout_rate > 0.0 {
                    let p = layer.spec.dropout_rate;
                    let keep = 1.0 / (1.0 - p);
                    let m =
                        Array2::from_shape_simple_fn(
                            current.dim(),
                            || {
                                if rng.random::<f64>() < p {
                                    0.0
                                } else {
                                    keep
                                }
                            },
                        );
                    current *= &m;
                    mask = Some(m);
                }
            }
            let z = current.dot(&layer.weights.t()) + &layer.bias;
            let a = layer.spec.activation.apply(&z);
            cache.inputs.push(current);
            cache.pre.push(z);
            cache.masks.push(mask);
            current = a.clone();
            cache.post.push(a);
        }
        Ok(cache)
    }

    /// Deterministic inference pass (noise and dropout disabled regardless
    /// of the model's mode).
    pub fn predict(&self, batch: &Array2<f64>) -> Result<Array2<f64>> {
        if batch.ncols() != self.input_dim() {
            return Err(IdsError::Shape(format!(
                "batch width {} but model expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        let mut current = batch.clone();
        for layer in &self.layers {
            let z = current.dot(&layer.weights.t()) + &layer.bias;
            current = layer.spec.activation.apply(&z);
        }
        Ok(current)
    }

    pub fn backward(&self, cache: &ForwardCache, grad: OutputGrad) -> Result<Gradients> {
        if cache.generation != self.generation || cache.pre.len() != self.layers.len() {
            return Err(IdsError::StaleCache(format!(
                "cache from generation {}, model at generation {}",
                cache.generation, self.generation
            )));
        }
        let last = self.layers.len() - 1;
        let mut weights = vec![Array2::zeros((0, 0)); self.layers.len()];
        let mut biases = vec![Array1::zeros(0); self.layers.len()];
        let (mut dz, expected) = match grad {
            OutputGrad::Logits(g) => (g, cache.pre[last].dim()),
            OutputGrad::Activations(g) => {
                let dim = cache.post[last].dim();
                if g.dim() != dim {
                    return Err(IdsError::Shape(format!(
                        "loss gradient {:?} vs output {:?}",
                        g.dim(),
                        dim
                    )));
                }
                let layer = &self.layers[last];
                (
                    layer.spec.activation.backprop(&cache.pre[last], &cache.post[last], &g),
                    dim,
                )
            }
        };
        if dz.dim() != expected {
            return Err(IdsError::Shape(format!(
                "gradient {:?} vs logits {:?}",
                dz.dim(),
                expected
            )));
        }
        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            weights[l] = dz.t().dot(&cache.inputs[l]);
            biases[l] = dz.sum_axis(Axis(0));
            if l == 0 {
                break;
            }
            let mut d_input = dz.dot(&layer.weights);
            if let Some(mask) = &cache.masks[l] {
                d_input *= mask;
            }
            let prev = &self.layers[l - 1];
            dz = prev
                .spec
                .activation
                .backprop(&cache.pre[l - 1], &cache.post[l - 1], &d_input);
        }
        Ok(Gradients { weights, biases })
    }

    /// Mutable flat views of every parameter, weights then bias per layer.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.generation += 1;
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weights.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format_version: crate::FORMAT_VERSION,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    spec: l.spec,
                    weights: l.weights.iter().copied().collect(),
                    biases: l.bias.to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        crate::check_version("model", file.format_version)?;
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                let weights = Array2::from_shape_vec((l.spec.out_dim, l.spec.in_dim), l.weights)
                    .map_err(|e| IdsError::Shape(format!("weights: {e}")))?;
                Ok(Layer {
                    spec: l.spec,
                    weights,
                    bias: Array1::from(l.biases),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(layers)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| IdsError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Serialized model: layer specs with row-major weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFile {
    #[serde(flatten)]
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}
