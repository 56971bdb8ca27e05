//! Hierarchical intrusion detection for NSL-KDD connection records.
//!
//! Stage one is an autoencoder trained on normal traffic that flags
//! connections whose reconstruction error exceeds a calibrated threshold.
//! Stage two classifies flagged connections into DoS, Probe, R2L and U2R
//! with a small dense network, optionally trained on SVM-SMOTE
//! oversampled data. The crate also ships the supervised binary baselines,
//! the metric suite, and an exploration report writer.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example
//! hierarchy_pipeline` is a good starting point.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod baselines;
pub mod classifier;
pub mod dataset;
pub mod detector;
pub mod error;
pub mod explore;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod resample;

pub use error::{IdsError, Result};

/// Version stamped into every persisted JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn check_version(artifact: &str, found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(IdsError::VersionMismatch {
            artifact: artifact.to_string(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    Ok(())
}

pub(crate) fn rng_from_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
