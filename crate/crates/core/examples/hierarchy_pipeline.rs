//! The two-stage hierarchy end to end with library calls: the detector
//! screens every test row, and only rows it flags reach the attack
//! classifier.
//!
//! ```text
//! cargo run --example hierarchy_pipeline
//! cargo run --release --example hierarchy_pipeline -- KDDTrain+.txt KDDTest+.txt
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Axis;

use hierids::app::Disposition;
use hierids::classifier::{train_fourclass, DnnConfig};
use hierids::dataset::{make_fixture, parse_kdd_file, AttackTaxonomy, BinaryLabel, Category, LabeledDataset, Split};
use hierids::detector::{fit_detector, Calibration, DetectorConfig};
use hierids::metrics::{binary_report, confusion, multiclass_report};
use hierids::preprocess::{FittedPipeline, PipelineOptions};
use hierids::resample::SvmSmoteConfig;

fn main() -> hierids::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    match args.as_slice() {
        [train, test] => run(Some((train, test)), None),
        _ => run(None, Some(30)),
    }
}

/// `epochs` caps both networks; `None` keeps the defaults.
pub fn run(files: Option<(&Path, &Path)>, epochs: Option<usize>) -> hierids::Result<()> {
    let (train_ds, test_ds): (LabeledDataset, LabeledDataset) = match files {
        Some((a, b)) => (parse_kdd_file(a, Split::Train)?, parse_kdd_file(b, Split::Test)?),
        None => (make_fixture(60, 1)?, make_fixture(20, 2)?),
    };
    let tax = AttackTaxonomy::extended();
    let pipeline = FittedPipeline::fit(&train_ds, PipelineOptions::default())?;
    let train = pipeline.transform(&train_ds, &tax)?;
    let test = pipeline.transform(&test_ds, &tax)?;

    // stage one
    let mut det_cfg = DetectorConfig {
        calibration: Calibration::LabeledF1,
        ..DetectorConfig::default()
    };
    let mut dnn_cfg = DnnConfig::default();
    if let Some(e) = epochs {
        det_cfg.train.max_epochs = e;
        dnn_cfg.train.max_epochs = e;
    }
    let (detector, _) = fit_detector(&train, &det_cfg)?;
    let scores = detector.detect(test.values())?;
    let verdicts: Vec<BinaryLabel> = scores.iter().map(|s| s.verdict).collect();
    let stage1 = binary_report(confusion(&test.binary_labels(), &verdicts, &BinaryLabel::ALL)?)?;
    let m = &stage1.attack_positive;
    println!(
        "stage one: accuracy {:.4}, F1 {:.4}, alpha {:.4}",
        m.accuracy, m.f1, detector.alpha
    );

    // stage two, trained on training attacks only
    let attacks = train.filter(Category::is_attack);
    let (classifier, _) = train_fourclass(&attacks, Some(&SvmSmoteConfig::default()), &dnn_cfg)?;

    let flagged: Vec<usize> = (0..test.nrows())
        .filter(|&i| verdicts[i] == BinaryLabel::Attack)
        .collect();
    let predicted = classifier.predict_categories(&test.values().select(Axis(0), &flagged))?;
    let mut stage2 = vec![Category::Normal; test.nrows()];
    for (&i, &c) in flagged.iter().zip(&predicted) {
        stage2[i] = c;
    }

    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for i in 0..test.nrows() {
        let d = Disposition::resolve(verdicts[i], test.categories()[i], stage2[i]);
        *tally.entry(d.to_string()).or_default() += 1;
    }
    println!("dispositions: {tally:?}");

    // four-class quality on the flagged rows that really are attacks
    let survivors: Vec<usize> = flagged
        .iter()
        .copied()
        .filter(|&i| test.categories()[i].is_attack())
        .collect();
    if !survivors.is_empty() {
        let truth: Vec<Category> = survivors.iter().map(|&i| test.categories()[i]).collect();
        let pred: Vec<Category> = survivors.iter().map(|&i| stage2[i]).collect();
        let r = multiclass_report(confusion(&truth, &pred, &Category::ATTACKS)?)?;
        println!(
            "stage two on {} true attacks: macro F1 {:.4}, accuracy {:.4}",
            survivors.len(),
            r.macro_f1,
            r.accuracy
        );
    }
    Ok(())
}
