//! SVM-SMOTE on an imbalanced, overlapping four-class attack set, plus plain SMOTE on
//! a single minority matrix.
//!
//! `cargo run --example oversampling`

use std::path::Path;

use ndarray::{array, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use hierids::dataset::{category_counts, Category, Split};
use hierids::preprocess::FeatureMatrix;
use hierids::resample::{smote_generate, svm_smote, SmoteConfig, SvmSmoteConfig};

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("oversampling"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;

    let minority = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let cfg = SmoteConfig {
        k_neighbors: 2,
        seed: 1,
        ..SmoteConfig::default()
    };
    println!("plain SMOTE rows:\n{}", smote_generate(&minority, 4, &cfg)?);

    // overlapping 2-D blobs: DoS-heavy with a tiny U2R class
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    let layout = [
        (Category::DoS, 400, [0.0, 0.0]),
        (Category::Probe, 120, [1.5, 0.0]),
        (Category::R2L, 30, [0.0, 1.5]),
        (Category::U2R, 6, [1.2, 1.2]),
    ];
    let mut values = Vec::new();
    let mut cats = Vec::new();
    for (cat, n, centre) in layout {
        for _ in 0..n {
            values.extend(centre.map(|c| c + rng.sample::<f64, _>(StandardNormal)));
            cats.push(cat);
        }
    }
    let attacks = FeatureMatrix::new(
        Array2::from_shape_vec((cats.len(), 2), values).unwrap(),
        cats,
        Split::Train,
    )?;
    println!("before: {:?}", category_counts(attacks.categories()));

    let mut cfg = SvmSmoteConfig::default();
    cfg.base.seed = 9;
    // U2R up to 120, R2L and Probe left to the default (largest class)
    cfg.base.target_counts.insert(Category::U2R, 120);
    let set = svm_smote(&attacks, &cfg)?;
    println!("after:  {:?}", category_counts(set.matrix.categories()));
    for log in &set.log {
        println!(
            "{:>5}: {} synthetic from {} borderline seeds ({} interpolated, {} extrapolated{})",
            log.class,
            log.synthetic,
            log.seeds,
            log.interpolated,
            log.extrapolated,
            if log.fallback { ", plain-SMOTE fallback" } else { "" }
        );
    }
    let first = set.provenance.first().expect("synthetic rows");
    println!(
        "first synthetic row: seed row {} towards row {}, lambda {:.3}",
        first.seed, first.neighbor, first.lambda
    );

    set.write_kdd(&work.join("oversampled.txt"))?;
    Ok(())
}
