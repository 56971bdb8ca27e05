//! Label-count encoding of the three categorical columns followed by
//! z-score standardization, fitted on training data only and persisted.
//!
//! `cargo run --example preprocessing`

use std::path::Path;

use hierids::dataset::{make_fixture, AttackTaxonomy};
use hierids::preprocess::{FittedPipeline, PipelineOptions};

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("preprocessing"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;
    let train = make_fixture(30, 1)?;
    let test = make_fixture(10, 2)?;
    let tax = AttackTaxonomy::extended();

    let pipeline = FittedPipeline::fit(&train, PipelineOptions::default())?;
    let services = pipeline.encoder.table("service").expect("service column");
    println!("most frequent service: {:?} -> code 0", services.decode(0));

    let x_train = pipeline.transform(&train, &tax)?;
    let x_test = pipeline.transform(&test, &tax)?;
    println!("train {:?}, test {:?}", x_train.values().dim(), x_test.values().dim());

    let col = x_train.values().column(4);
    let mean = col.sum() / col.len() as f64;
    println!("src_bytes after scaling: mean {mean:.2e}");

    let path = work.join("preprocess.json");
    pipeline.save(&path)?;
    let reloaded = FittedPipeline::load(&path)?;
    assert_eq!(reloaded.transform(&test, &tax)?, x_test);
    println!("reloaded pipeline reproduces the test matrix");

    let dropped = FittedPipeline::fit(&train, PipelineOptions { drop_constant: true })?;
    println!("with constant columns dropped: {} of 41 kept", dropped.output_width());
    Ok(())
}
