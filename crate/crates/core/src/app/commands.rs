use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{Disposition, PipelineReport, Stage1Report, Stage2Report, StageTimings};
use super::{RunConfig, Variant};
use crate::baselines::{fit_baseline, Baseline};
use crate::classifier::{evaluate_fourclass, train_fourclass, AttackClassifier, CLASS_ORDER};
use crate::dataset::{parse_kdd_file, AttackTaxonomy, BinaryLabel, Category, LabeledDataset, Split};
use crate::detector::{fit_detector, scores_to_csv, AnomalyDetector};
use crate::error::{IdsError, Result};
use crate::metrics::{binary_metrics, binary_report, confusion, multiclass_report, BinaryMetrics};
use crate::preprocess::{FeatureMatrix, FittedPipeline, PipelineOptions};

pub const PREPROCESS_FILE: &str = "preprocess.json";
pub const DETECTOR_FILE: &str = "detector.json";

fn write(path: &Path, text: &str) -> Result<PathBuf> {
    std::fs::write(path, text).map_err(|e| IdsError::io(path, e))?;
    Ok(path.to_path_buf())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn load_split(path: &Path, split: Split) -> Result<LabeledDataset> {
    log::info!("reading {}", path.display());
    parse_kdd_file(path, split)
}

/// Fits the preprocessing pipeline on the training file and persists it.
fn prepare_train(cfg: &RunConfig, out: &Path, tax: &AttackTaxonomy) -> Result<(FittedPipeline, FeatureMatrix)> {
    let ds = load_split(cfg.train_path()?, Split::Train)?;
    let pipeline = FittedPipeline::fit(
        &ds,
        PipelineOptions {
            drop_constant: cfg.drop_constant,
        },
    )?;
    let matrix = pipeline.transform(&ds, tax)?;
    pipeline.save(&out.join(PREPROCESS_FILE))?;
    Ok((pipeline, matrix))
}

/// Writes the exploration report under `<out>/explore`.
pub fn cmd_explore(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let tax = cfg.load_taxonomy()?;
    let ds = load_split(cfg.train_path()?, Split::Train)?;
    let dir = cfg.ensure_out_dir()?.join("explore");
    let files = crate::explore::write_report(&ds, &tax, &dir, &cfg.explore)?;
    log::info!("explore: wrote {} files under {}", files.len(), dir.display());
    Ok(files)
}

/// Trains and calibrates the stage-one detector.
pub fn cmd_train_binary(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let tax = cfg.load_taxonomy()?;
    let out = cfg.ensure_out_dir()?;
    let (_, train) = prepare_train(cfg, out, &tax)?;
    let (detector, report) = fit_detector(&train, &cfg.detector_config())?;
    detector.save(&out.join(DETECTOR_FILE))?;
    Ok(vec![
        out.join(PREPROCESS_FILE),
        out.join(DETECTOR_FILE),
        write_json(&out.join("detector_report.json"), &report)?,
    ])
}

/// Trains one stage-two classifier per requested variant on the
/// training attacks.
pub fn cmd_train_multiclass(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let tax = cfg.load_taxonomy()?;
    let out = cfg.ensure_out_dir()?;
    let (_, train) = prepare_train(cfg, out, &tax)?;
    let attacks = train.filter(|c| c.is_attack());
    if attacks.is_empty() {
        return Err(IdsError::InvalidInput("training data has no attack rows".into()));
    }
    let dnn = cfg.classifier_config();
    let smote = cfg.smote_config();
    let mut files = vec![out.join(PREPROCESS_FILE)];
    for &variant in cfg.oversample.variants() {
        let over = (variant == Variant::Oversampled).then_some(&smote);
        let (clf, report) = train_fourclass(&attacks, over, &dnn)?;
        for l in &report.resample_log {
            log::info!("{variant}: {} gained {} synthetic rows", l.class, l.synthetic);
        }
        let path = out.join(variant.model_file());
        clf.save(&path)?;
        files.push(path);
        files.push(write_json(
            &out.join(format!("classifier_{variant}_report.json")),
            &report,
        )?);
    }
    Ok(files)
}

fn stage2(
    variant: Variant,
    clf: &AttackClassifier,
    test: &FeatureMatrix,
    verdicts: &[BinaryLabel],
) -> Result<Stage2Report> {
    let predicted = clf.predict_categories(test.values())?;
    let truth = test.categories();

    let gt_rows: Vec<usize> = (0..truth.len()).filter(|&i| truth[i].is_attack()).collect();
    if gt_rows.is_empty() {
        return Err(IdsError::InvalidInput("test data has no attack rows".into()));
    }
    let ground_truth_attacks = evaluate_fourclass(clf, &test.select(&gt_rows))?;

    let survivor_rows: Vec<usize> = gt_rows
        .iter()
        .copied()
        .filter(|&i| verdicts[i] == BinaryLabel::Attack)
        .collect();
    let survivors = if survivor_rows.is_empty() {
        None
    } else {
        let t: Vec<Category> = survivor_rows.iter().map(|&i| truth[i]).collect();
        let p: Vec<Category> = survivor_rows.iter().map(|&i| predicted[i]).collect();
        Some(multiclass_report(confusion(&t, &p, &CLASS_ORDER)?)?)
    };

    let mut dispositions: BTreeMap<String, usize> = BTreeMap::new();
    for name in ["normal", "DoS", "Probe", "R2L", "U2R", "false-positive-normal"] {
        dispositions.insert(name.to_string(), 0);
    }
    let mut fp_normals = 0;
    for i in 0..truth.len() {
        let d = Disposition::resolve(verdicts[i], truth[i], predicted[i]);
        if d == Disposition::FalsePositiveNormal {
            fp_normals += 1;
        }
        *dispositions.entry(d.to_string()).or_default() += 1;
    }
    Ok(Stage2Report {
        variant,
        ground_truth_attacks,
        survivors,
        survivor_attacks: survivor_rows.len(),
        false_positive_normals: fp_normals,
        dispositions,
    })
}

/// Runs both stages over the test file with the persisted models.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<PipelineReport> {
    let tax = cfg.load_taxonomy()?;
    let out = cfg.ensure_out_dir()?;
    let t0 = Instant::now();
    let pipeline = FittedPipeline::load(&out.join(PREPROCESS_FILE))?;
    let detector = AnomalyDetector::load(&out.join(DETECTOR_FILE))?;
    let classifiers: Vec<(Variant, AttackClassifier)> = cfg
        .oversample
        .variants()
        .iter()
        .map(|&v| Ok((v, AttackClassifier::load(&out.join(v.model_file()))?)))
        .collect::<Result<_>>()?;
    let ds = load_split(cfg.test_path()?, Split::Test)?;
    let test = pipeline.transform(&ds, &tax)?;
    let mut timings = StageTimings {
        preprocess_s: t0.elapsed().as_secs_f64(),
        ..StageTimings::default()
    };

    let t1 = Instant::now();
    let scores = detector.detect(test.values())?;
    let verdicts: Vec<BinaryLabel> = scores.iter().map(|s| s.verdict).collect();
    let truth = test.binary_labels();
    let cm = confusion(&truth, &verdicts, &[BinaryLabel::Normal, BinaryLabel::Attack])?;
    let stage1 = Stage1Report {
        calibration: detector.calibration,
        alpha: detector.alpha,
        rows: test.nrows(),
        predicted_attacks: verdicts.iter().filter(|&&v| v == BinaryLabel::Attack).count(),
        binary: binary_report(cm)?,
    };
    timings.stage1_s = t1.elapsed().as_secs_f64();
    log::info!(
        "stage 1: accuracy {:.4}, attack F1 {:.4}, {} flagged",
        stage1.binary.attack_positive.accuracy,
        stage1.binary.attack_positive.f1,
        stage1.predicted_attacks
    );

    let mut stage2_reports = Vec::new();
    for (variant, clf) in &classifiers {
        let t = Instant::now();
        let r = stage2(*variant, clf, &test, &verdicts)?;
        timings.stage2_s.insert(variant.to_string(), t.elapsed().as_secs_f64());
        log::info!(
            "stage 2 ({variant}): macro F1 {:.4}, U2R F1 {:.4}, accuracy {:.4}",
            r.ground_truth_attacks.macro_f1,
            r.ground_truth_attacks.f1_of("U2R").unwrap_or(0.0),
            r.ground_truth_attacks.accuracy
        );
        stage2_reports.push(r);
    }
    let report = PipelineReport {
        test_rows: test.nrows(),
        stage1,
        stage2: stage2_reports,
        timings,
    };

    let dir = out.join("evaluation");
    std::fs::create_dir_all(&dir).map_err(|e| IdsError::io(&dir, e))?;
    write_json(&dir.join("report.json"), &report)?;
    write_json(&dir.join("timings.json"), &report.timings)?;
    write(&dir.join("scores.csv"), &scores_to_csv(&scores))?;
    write(
        &dir.join("stage1_confusion.csv"),
        &report.stage1.binary.confusion.to_csv(),
    )?;
    for s in &report.stage2 {
        write(
            &dir.join(format!("stage2_{}_ground_truth_confusion.csv", s.variant)),
            &s.ground_truth_attacks.confusion.to_csv(),
        )?;
        if let Some(r) = &s.survivors {
            write(
                &dir.join(format!("stage2_{}_survivors_confusion.csv", s.variant)),
                &r.confusion.to_csv(),
            )?;
        }
    }
    write(&dir.join("table2.csv"), &report.table2_csv())?;
    write(&dir.join("table3.csv"), &report.table3_csv())?;
    Ok(report)
}

/// Train-binary, train-multiclass, then evaluate.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PipelineReport> {
    cmd_train_binary(cfg)?;
    cmd_train_multiclass(cfg)?;
    cmd_evaluate(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub model: Baseline,
    pub metrics: BinaryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinesReport {
    /// Accuracy of always predicting the test set's most common class.
    pub majority_accuracy: f64,
    pub rows: Vec<BaselineRow>,
}

impl BaselinesReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,accuracy,precision,recall,f1\n");
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.model.display_name(),
                m.accuracy,
                m.precision,
                m.recall,
                m.f1
            );
        }
        out
    }
}

/// Fits each selected baseline on the training file and scores it on
/// the test file (attack = positive).
pub fn cmd_baselines(cfg: &RunConfig) -> Result<BaselinesReport> {
    if cfg.baselines.is_empty() {
        return Err(IdsError::Config("no baselines selected".into()));
    }
    let tax = cfg.load_taxonomy()?;
    let out = cfg.ensure_out_dir()?;
    let (pipeline, train) = prepare_train(cfg, out, &tax)?;
    let test = pipeline.transform(&load_split(cfg.test_path()?, Split::Test)?, &tax)?;
    let y_train: Vec<usize> = train.binary_labels().iter().map(|b| b.index()).collect();
    let y_test: Vec<usize> = test.binary_labels().iter().map(|b| b.index()).collect();
    let attacks = y_test.iter().filter(|&&y| y == 1).count();
    let majority_accuracy = attacks.max(y_test.len() - attacks) as f64 / y_test.len() as f64;

    let mut rows = Vec::new();
    for &b in &cfg.baselines {
        let t = Instant::now();
        let model = fit_baseline(b, train.values(), &y_train, &cfg.baseline_config, cfg.seed)?;
        let pred = model.predict(test.values());
        let cm = confusion(&y_test, &pred, &[0, 1])?;
        let metrics = binary_metrics(&cm, 1)?;
        log::info!(
            "{b}: accuracy {:.4}, F1 {:.4} ({:.1}s)",
            metrics.accuracy,
            metrics.f1,
            t.elapsed().as_secs_f64()
        );
        rows.push(BaselineRow { model: b, metrics });
    }
    let report = BaselinesReport {
        majority_accuracy,
        rows,
    };
    write(&out.join("baselines.csv"), &report.to_csv())?;
    write_json(&out.join("baselines.json"), &report)?;
    Ok(report)
}
