//! Driving the command layer from code: a `RunConfig` built in Rust, the
//! same run through the `hierids` argument parser, and the files both
//! leave behind.
//!
//! `cargo run --example cli_pipeline`

use std::path::Path;

use hierids::app::{cmd_pipeline, run_cli, Oversample, RunConfig};
use hierids::dataset::make_fixture;

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("cli_pipeline"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;
    let train = work.join("train.txt");
    let test = work.join("test.txt");
    make_fixture(40, 1)?.write(&train)?;
    make_fixture(15, 2)?.write(&test)?;

    let mut cfg = RunConfig {
        train: Some(train.clone()),
        test: Some(test.clone()),
        out: work.join("from_code"),
        seed: 5,
        oversample: Oversample::Both,
        ..RunConfig::default()
    };
    cfg.detector.train.max_epochs = 20;
    cfg.classifier.train.max_epochs = 20;
    let report = cmd_pipeline(&cfg)?;
    print!("{}", report.table2_csv());
    print!("{}", report.table3_csv());

    // the same run as a command line; the config file carries the epochs
    let cfg_file = work.join("run.json");
    std::fs::write(&cfg_file, serde_json::to_string_pretty(&cfg)?).map_err(|e| hierids::IdsError::io(&cfg_file, e))?;
    let out = work.join("from_cli");
    let code = run_cli([
        "hierids".as_ref(),
        "pipeline".as_ref(),
        "--config".as_ref(),
        cfg_file.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
        "--quiet".as_ref(),
    ]);
    println!("exit code {code}");
    let a = std::fs::read(work.join("from_code/evaluation/report.json")).map_err(|e| hierids::IdsError::io(work, e))?;
    let b = std::fs::read(out.join("evaluation/report.json")).map_err(|e| hierids::IdsError::io(&out, e))?;
    println!("reports identical: {}", a == b);
    Ok(())
}
