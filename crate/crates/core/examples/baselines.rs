//! The seven supervised binary baselines on the same preprocessed data,
//! reported against the majority-class floor.
//!
//! `cargo run --example baselines`

use hierids::baselines::{fit_baseline, Baseline, BaselineConfig};
use hierids::dataset::{make_fixture, AttackTaxonomy};
use hierids::metrics::{binary_metrics, confusion};
use hierids::preprocess::{FittedPipeline, PipelineOptions};

fn main() -> hierids::Result<()> {
    run()
}

pub fn run() -> hierids::Result<()> {
    let tax = AttackTaxonomy::extended();
    let train_ds = make_fixture(40, 1)?;
    let test_ds = make_fixture(15, 2)?;
    let pipeline = FittedPipeline::fit(&train_ds, PipelineOptions::default())?;
    let train = pipeline.transform(&train_ds, &tax)?;
    let test = pipeline.transform(&test_ds, &tax)?;
    let y_train: Vec<usize> = train.binary_labels().iter().map(|b| b.index()).collect();
    let y_test: Vec<usize> = test.binary_labels().iter().map(|b| b.index()).collect();

    let attacks = y_test.iter().filter(|&&y| y == 1).count();
    let majority = attacks.max(y_test.len() - attacks) as f64 / y_test.len() as f64;
    println!("majority-class accuracy {majority:.3}");

    let mut cfg = BaselineConfig::default();
    cfg.forest.n_trees = 25;
    println!(
        "{:<18} {:>8} {:>9} {:>7} {:>7}",
        "model", "accuracy", "precision", "recall", "f1"
    );
    for kind in Baseline::ALL {
        let model = fit_baseline(kind, train.values(), &y_train, &cfg, 7)?;
        let m = binary_metrics(&confusion(&y_test, &model.predict(test.values()), &[0, 1])?, 1)?;
        println!(
            "{:<18} {:>8.3} {:>9.3} {:>7.3} {:>7.3}",
            kind.display_name(),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1
        );
    }
    let parsed: Baseline = "random-forest".parse()?;
    println!("names parse loosely: {parsed:?}");
    Ok(())
}
