//! Runs every example's `run` function so the walkthroughs cannot rot.

#![allow(dead_code)]

use std::path::Path;

#[path = "../examples/anomaly_detector.rs"]
mod anomaly_detector;
#[path = "../examples/attack_classifier.rs"]
mod attack_classifier;
#[path = "../examples/baselines.rs"]
mod baselines;
#[path = "../examples/cli_pipeline.rs"]
mod cli_pipeline;
#[path = "../examples/dataset_tour.rs"]
mod dataset_tour;
#[path = "../examples/explore_report.rs"]
mod explore_report;
#[path = "../examples/hierarchy_pipeline.rs"]
mod hierarchy_pipeline;
#[path = "../examples/make_fixture.rs"]
mod make_fixture;
#[path = "../examples/metrics_tour.rs"]
mod metrics_tour;
#[path = "../examples/neural_net.rs"]
mod neural_net;
#[path = "../examples/oversampling.rs"]
mod oversampling;
#[path = "../examples/preprocessing.rs"]
mod preprocessing;

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn make_fixture_runs() {
    let dir = scratch();
    make_fixture::run(dir.path(), "12").unwrap();
    assert!(dir.path().join("train.txt").is_file() && dir.path().join("test.txt").is_file());
    assert!(make_fixture::run(dir.path(), "lots").is_err());
}

#[test]
fn dataset_tour_runs() {
    let dir = scratch();
    dataset_tour::run(dir.path(), None).unwrap();
    assert!(dir.path().join("SHA256SUMS").is_file());
}

#[test]
fn dataset_tour_reads_a_given_file() {
    let dir = scratch();
    let file = dir.path().join("given.txt");
    hierids::dataset::make_fixture(3, 4).unwrap().write(&file).unwrap();
    dataset_tour::run(&dir.path().join("work"), Some(&file)).unwrap();
}

#[test]
fn preprocessing_runs() {
    preprocessing::run(scratch().path()).unwrap();
}

#[test]
fn neural_net_runs() {
    neural_net::run().unwrap();
}

#[test]
fn oversampling_runs() {
    let dir = scratch();
    oversampling::run(dir.path()).unwrap();
    assert!(dir.path().join("oversampled.txt").is_file());
}

#[test]
fn anomaly_detector_runs() {
    anomaly_detector::run(scratch().path()).unwrap();
}

#[test]
fn attack_classifier_runs() {
    attack_classifier::run(scratch().path()).unwrap();
}

#[test]
fn baselines_run() {
    baselines::run().unwrap();
}

#[test]
fn metrics_tour_runs() {
    metrics_tour::run().unwrap();
}

#[test]
fn explore_report_runs() {
    let dir = scratch();
    explore_report::run(dir.path()).unwrap();
    assert!(dir.path().join("correlation.csv").is_file());
}

#[test]
fn hierarchy_pipeline_runs() {
    hierarchy_pipeline::run(None, Some(10)).unwrap();
}

#[test]
fn hierarchy_pipeline_reads_files() {
    let dir = scratch();
    let (train, test) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    hierids::dataset::make_fixture(30, 1).unwrap().write(&train).unwrap();
    hierids::dataset::make_fixture(10, 2).unwrap().write(&test).unwrap();
    hierarchy_pipeline::run(Some((Path::new(&train), Path::new(&test))), Some(5)).unwrap();
}

#[test]
fn cli_pipeline_runs() {
    let dir = scratch();
    cli_pipeline::run(dir.path()).unwrap();
    let a = std::fs::read(dir.path().join("from_code/evaluation/report.json")).unwrap();
    let b = std::fs::read(dir.path().join("from_cli/evaluation/report.json")).unwrap();
    assert_eq!(a, b);
}
