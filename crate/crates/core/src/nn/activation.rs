use ndarray::{Array2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Selu,
    Softmax,
    Identity,
}

fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Applies an activation to one vector.
pub fn activation(kind: Activation, x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(IdsError::InvalidInput("non-finite activation input".into()));
    }
    let mut out = x.to_vec();
    match kind {
        Activation::Relu => out.iter_mut().for_each(|v| *v = v.max(0.0)),
        Activation::Selu => out.iter_mut().for_each(|v| *v = selu(*v)),
        Activation::Identity => {}
        Activation::Softmax => {
            if out.is_empty() {
                return Err(IdsError::InvalidInput("softmax of an empty vector".into()));
            }
            softmax_in_place(&mut out);
        }
    }
    Ok(out)
}

impl Activation {
    /// Row-wise application to a batch of pre-activations.
    pub(crate) fn apply(self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => z.mapv(|v| v.max(0.0)),
            Activation::Selu => z.mapv(selu),
            Activation::Identity => z.clone(),
            Activation::Softmax => {
                let mut out = z.clone();
                for mut row in out.axis_iter_mut(Axis(0)) {
                    match row.as_slice_mut() {
                        Some(s) => softmax_in_place(s),
                        None => {
                            let mut v = row.to_vec();
                            softmax_in_place(&mut v);
                            row.assign(&ndarray::ArrayView1::from(&v));
                        }
                    }
                }
                out
            }
        }
    }

    /// Gradient with respect to the pre-activation `z`, given the gradient
    /// `grad` with respect to the activation output `a`.
    pub(crate) fn backprop(self, z: &Array2<f64>, a: &Array2<f64>, grad: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => grad.clone(),
            Activation::Relu => {
                let mut out = grad.clone();
                Zip::from(&mut out).and(z).for_each(|g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                out
            }
            Activation::Selu => {
                let mut out = grad.clone();
                Zip::from(&mut out).and(z).for_each(|g, &z| {
                    *g *= if z > 0.0 {
                        SELU_LAMBDA
                    } else {
                        SELU_LAMBDA * SELU_ALPHA * z.exp()
                    };
                });
                out
            }
            Activation::Softmax => {
                // dz = s * (g - <g, s>) per row
                let dot = (grad * a).sum_axis(Axis(1)).insert_axis(Axis(1));
                a * &(grad - &dot)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn relu_and_selu_points() {
        assert_eq!(activation(Activation::Relu, &[-1.0, 2.0]).unwrap(), [0.0, 2.0]);
        assert_eq!(activation(Activation::Selu, &[0.0]).unwrap(), [0.0]);
        assert_abs_diff_eq!(activation(Activation::Selu, &[1.0]).unwrap()[0], SELU_LAMBDA);
        assert_abs_diff_eq!(
            activation(Activation::Selu, &[-50.0]).unwrap()[0],
            -SELU_LAMBDA * SELU_ALPHA,
            epsilon = 1e-12
        );
    }

    #[test]
    fn softmax_symmetric_pair() {
        assert_eq!(activation(Activation::Softmax, &[0.0, 0.0]).unwrap(), [0.5, 0.5]);
        assert!(activation(Activation::Softmax, &[]).is_err());
        assert!(activation(Activation::Relu, &[f64::NAN]).is_err());
        assert!(activation(Activation::Identity, &[f64::INFINITY]).is_err());
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            logits in proptest::collection::vec(-30.0f64..30.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let s = activation(Activation::Softmax, &logits).unwrap();
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            for &p in &s {
                prop_assert!(p > 0.0 && p <= 1.0);
            }
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let t = activation(Activation::Softmax, &shifted).unwrap();
            for (a, b) in s.iter().zip(&t) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
