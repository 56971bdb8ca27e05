//! Stage one alone: an autoencoder trained on normal traffic, its
//! threshold calibrated two ways, then used to flag test rows.
//!
//! `cargo run --example anomaly_detector`

use std::path::Path;

use hierids::dataset::{make_fixture, AttackTaxonomy, BinaryLabel};
use hierids::detector::{fit_detector, scores_to_csv, AnomalyDetector, Calibration, DetectorConfig};
use hierids::metrics::{binary_report, confusion};
use hierids::preprocess::{FittedPipeline, PipelineOptions};

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("anomaly_detector"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;
    let tax = AttackTaxonomy::extended();
    let train_ds = make_fixture(60, 1)?;
    let test_ds = make_fixture(20, 2)?;
    let pipeline = FittedPipeline::fit(&train_ds, PipelineOptions::default())?;
    let train = pipeline.transform(&train_ds, &tax)?;
    let test = pipeline.transform(&test_ds, &tax)?;

    for calibration in [Calibration::Quantile { q: 0.95 }, Calibration::LabeledF1] {
        let mut cfg = DetectorConfig {
            calibration,
            ..DetectorConfig::default()
        };
        cfg.train.max_epochs = 30;
        let (detector, report) = fit_detector(&train, &cfg)?;
        println!(
            "{calibration}: trained on {} normals for {} epochs, alpha {:.4}",
            report.normal_rows,
            report.history.epochs(),
            detector.alpha
        );

        let scores = detector.detect(test.values())?;
        let truth = test.binary_labels();
        let predicted: Vec<BinaryLabel> = scores.iter().map(|s| s.verdict).collect();
        let m = binary_report(confusion(&truth, &predicted, &BinaryLabel::ALL)?)?.attack_positive;
        println!(
            "  test accuracy {:.3}, precision {:.3}, recall {:.3}, F1 {:.3}",
            m.accuracy, m.precision, m.recall, m.f1
        );

        let name = format!("scores_{}.csv", calibration.to_string().replace(':', "_"));
        std::fs::write(work.join(name), scores_to_csv(&scores)).map_err(|e| hierids::IdsError::io(work, e))?;

        let path = work.join("detector.json");
        detector.save(&path)?;
        assert_eq!(AnomalyDetector::load(&path)?.detect(test.values())?, scores);
    }
    Ok(())
}
