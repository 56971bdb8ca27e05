//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and
//! exits non-zero if anything fails.
//!
//! Criteria that need the real NSL-KDD files read them from the
//! directory named by `NSLKDD_DIR` (KDDTrain+.txt, KDDTest+.txt) and are
//! skipped when it is unset. Run those with `--release`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use hierids::app::{cmd_baselines, cmd_pipeline, Oversample, PipelineReport, RunConfig, Variant};
use hierids::baselines::{fit_baseline, Baseline, BaselineConfig};
use hierids::classifier::{train_fourclass, DnnConfig};
use hierids::dataset::{
    category_counts, make_fixture, parse_kdd_file, AttackTaxonomy, Category, Split, TRAIN_ATTACK_CENSUS,
};
use hierids::detector::{fit_detector, reconstruction_errors, Calibration, DetectorConfig};
use hierids::metrics::{confusion, f1_score, macro_micro};
use hierids::nn::{activation, one_hot, Activation, LayerSpec, Loss, MlpModel, OutputGrad};
use hierids::preprocess::{fit_standardizer, FittedPipeline, PipelineOptions};
use hierids::resample::{knn, smote_generate, svm_smote, SmoteConfig, SvmSmoteConfig};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

fn random_matrix(rows: usize, cols: usize, r: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || gauss(r))
}

struct RealData {
    train: PathBuf,
    test: PathBuf,
}

fn real_data() -> Option<RealData> {
    let dir = PathBuf::from(std::env::var_os("NSLKDD_DIR")?);
    let train = dir.join("KDDTrain+.txt");
    let test = dir.join("KDDTest+.txt");
    (train.is_file() && test.is_file()).then_some(RealData { train, test })
}

const NO_DATA: &str = "NSLKDD_DIR not set or missing KDDTrain+.txt/KDDTest+.txt";

// ---------------------------------------------------------------- 2

/// Reference (precision, recall, f1) for the eight binary models.
const BINARY_TABLE: [(&str, f64, f64, f64); 8] = [
    ("Decision Tree", 0.6816, 0.8309, 0.7489),
    ("Random Forest", 0.8734, 0.6765, 0.7624),
    ("Naive Bayes", 0.9621, 0.5995, 0.7387),
    ("SVM", 0.9756, 0.6738, 0.7971),
    ("AdaBoost", 0.8690, 0.7514, 0.8059),
    ("Gradient Boosting", 0.6504, 0.9513, 0.7726),
    ("MLP", 0.9582, 0.6396, 0.7671),
    ("Autoencoder", 0.9320, 0.8422, 0.8848),
];

fn f1_identity() -> Outcome {
    let mut worst: (f64, &str) = (0.0, "");
    for (name, p, r, f1) in BINARY_TABLE {
        let got = f1_score(p, r);
        let d = (got - f1).abs();
        if d > worst.0 {
            worst = (d, name);
        }
    }
    if worst.0 <= 0.001 {
        Pass(format!("8 rows, max |dF1| {:.5} ({})", worst.0, worst.1))
    } else {
        Fail(format!("{} off by {:.5}", worst.1, worst.0))
    }
}

// ---------------------------------------------------------------- 6

type Check = (&'static str, fn() -> Result<(), String>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_small_model(r: &mut impl Rng) -> (Vec<LayerSpec>, Loss) {
    let acts = [Activation::Relu, Activation::Selu, Activation::Identity];
    let d_in = r.random_range(1..=4);
    let d_hidden = r.random_range(1..=4);
    let d_out = r.random_range(2..=4);
    let hidden = acts[r.random_range(0..acts.len())];
    let (out, loss) = if r.random::<bool>() {
        (Activation::Softmax, Loss::CrossEntropy)
    } else {
        (acts[r.random_range(0..acts.len())], Loss::Mse)
    };
    (
        vec![
            LayerSpec::dense(d_in, d_hidden, hidden),
            LayerSpec::dense(d_hidden, d_out, out),
        ],
        loss,
    )
}

fn batch_loss(m: &MlpModel, x: &Array2<f64>, y: &Array2<f64>, loss: Loss) -> f64 {
    let c = m.forward(x, &mut rng(0)).unwrap();
    loss.evaluate(c.output().view(), y.view()).unwrap().0
}

fn gradient_check() -> Result<(), String> {
    let h = 1e-5;
    let mut r = rng(4242);
    for trial in 0..100 {
        let (specs, loss) = random_small_model(&mut r);
        let mut model = MlpModel::new(&specs, &mut r).map_err(|e| e.to_string())?;
        for p in model.parameters_mut() {
            p.iter_mut().for_each(|v| *v += 0.1 * gauss(&mut r));
        }
        let n = 3;
        let x = random_matrix(n, specs[0].in_dim, &mut r);
        let k = specs[1].out_dim;
        let y = match loss {
            Loss::Mse => random_matrix(n, k, &mut r),
            Loss::CrossEntropy => one_hot(&(0..n).map(|_| r.random_range(0..k)).collect::<Vec<_>>(), k),
        };
        let cache = model.forward(&x, &mut rng(0)).unwrap();
        let (_, g) = loss.evaluate(cache.output().view(), y.view()).unwrap();
        let grads = model.backward(&cache, OutputGrad::Activations(g)).unwrap();
        let analytic: Vec<f64> = grads
            .weights
            .iter()
            .zip(&grads.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect();
        let tensors = model.parameters_mut().len();
        let mut idx = 0;
        for t in 0..tensors {
            let len = model.clone().parameters_mut()[t].len();
            for j in 0..len {
                let mut plus = model.clone();
                plus.parameters_mut()[t][j] += h;
                let mut minus = model.clone();
                minus.parameters_mut()[t][j] -= h;
                let numeric = (batch_loss(&plus, &x, &y, loss) - batch_loss(&minus, &x, &y, loss)) / (2.0 * h);
                let a = analytic[idx];
                let scale = a.abs().max(numeric.abs());
                let err = if scale <= 1e-6 {
                    (a - numeric).abs()
                } else {
                    (a - numeric).abs() / scale
                };
                ensure(err <= 1e-4, || {
                    format!("model {trial} parameter {idx}: analytic {a} numeric {numeric}")
                })?;
                idx += 1;
            }
        }
    }
    Ok(())
}

/// Every synthetic row must sit on the segment between some minority row
/// and one of its k nearest minority neighbours.
fn smote_segments() -> Result<(), String> {
    let mut r = rng(77);
    let k = 3;
    for seed in 0..1000u64 {
        let n = r.random_range(2..=8);
        let d = r.random_range(1..=4);
        let minority = random_matrix(n, d, &mut r);
        let cfg = SmoteConfig {
            k_neighbors: k,
            seed,
            ..SmoteConfig::default()
        };
        let syn = smote_generate(&minority, 5, &cfg).map_err(|e| e.to_string())?;
        for s in syn.rows() {
            let on_segment = (0..n).any(|i| {
                let neighbours = knn(minority.row(i), minority.view(), k.min(n - 1), Some(i)).unwrap();
                neighbours.iter().any(|&j| {
                    let (a, b) = (minority.row(i), minority.row(j));
                    let dir = &b - &a;
                    let len2 = dir.dot(&dir);
                    if len2 == 0.0 {
                        return (&s - &a).iter().all(|v| v.abs() < 1e-12);
                    }
                    let lambda = (&s - &a).dot(&dir) / len2;
                    let off = &s - &(&a + &(&dir * lambda));
                    (-1e-12..=1.0 + 1e-12).contains(&lambda) && off.iter().all(|v| v.abs() < 1e-9)
                })
            });
            ensure(on_segment, || {
                format!("seed {seed}: {s} is off every neighbour segment")
            })?;
        }
    }
    Ok(())
}

fn standardizer_invariant() -> Result<(), String> {
    let mut r = rng(5);
    for trial in 0..50 {
        let n = r.random_range(2..200);
        let d = r.random_range(1..10);
        let mut x = random_matrix(n, d, &mut r);
        for mut col in x.columns_mut() {
            let (scale, shift) = (r.random_range(0.01..1e3), r.random_range(-1e3..1e3));
            col.mapv_inplace(|v| v * scale + shift);
        }
        let z = fit_standardizer(&x).unwrap().transform(&x).unwrap();
        for (j, col) in z.columns().into_iter().enumerate() {
            let mean = col.sum() / n as f64;
            let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            ensure(mean.abs() <= 1e-9 && (std - 1.0).abs() <= 1e-9, || {
                format!("trial {trial} column {j}: mean {mean} std {std}")
            })?;
        }
    }
    Ok(())
}

fn softmax_laws() -> Result<(), String> {
    let mut r = rng(6);
    for _ in 0..1000 {
        let len = r.random_range(1..10);
        let v: Vec<f64> = (0..len).map(|_| 20.0 * gauss(&mut r)).collect();
        let c = r.random_range(-500.0..500.0);
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let p = activation(Activation::Softmax, &v).unwrap();
        let q = activation(Activation::Softmax, &shifted).unwrap();
        let sum: f64 = p.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("softmax of {v:?} sums to {sum}"))?;
        ensure(p.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-9), || {
            format!("shift {c} changed softmax of {v:?}")
        })?;
    }
    Ok(())
}

fn confusion_laws() -> Result<(), String> {
    let mut r = rng(7);
    for _ in 0..200 {
        let k = r.random_range(2..6);
        let n = r.random_range(1..300);
        let truth: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let order: Vec<usize> = (0..k).collect();
        let cm = confusion(&truth, &pred, &order).unwrap();
        ensure(cm.total() == n as u64, || format!("total {} != {n}", cm.total()))?;
        for c in 0..k {
            let t = truth.iter().filter(|&&v| v == c).count() as u64;
            let p = pred.iter().filter(|&&v| v == c).count() as u64;
            ensure(cm.row_sum(c) == t && cm.col_sum(c) == p, || {
                format!("class {c} margins disagree")
            })?;
        }
        let scores: Vec<f64> = (0..k).map(|_| r.random::<f64>()).collect();
        let support = r.random_range(1..100u64);
        let (ma, mi) = macro_micro(&scores, &vec![support; k]).unwrap();
        ensure((ma - mi).abs() <= 1e-12, || {
            format!("equal supports: macro {ma} micro {mi}")
        })?;
    }
    Ok(())
}

fn quick_detector_config(seed: u64) -> DetectorConfig {
    let mut cfg = DetectorConfig::default();
    cfg.train.max_epochs = 10;
    cfg.train.seed = seed;
    cfg
}

fn detector_monotonicity() -> Result<(), String> {
    let ds = make_fixture(30, 3).unwrap();
    let tax = AttackTaxonomy::extended();
    let pipeline = FittedPipeline::fit(&ds, PipelineOptions::default()).unwrap();
    let m = pipeline.transform(&ds, &tax).unwrap();
    let (det, _) = fit_detector(&m, &quick_detector_config(1)).map_err(|e| e.to_string())?;
    let mut r = rng(8);
    for ladder in 0..100 {
        let mut alphas: Vec<f64> = (0..8).map(|_| r.random_range(1e-3..200.0)).collect();
        alphas.sort_by(f64::total_cmp);
        let mut last = usize::MAX;
        for &a in &alphas {
            let flagged = det
                .with_alpha(a)
                .unwrap()
                .detect(m.values())
                .unwrap()
                .iter()
                .filter(|s| s.verdict.index() == 1)
                .count();
            ensure(flagged <= last, || {
                format!("ladder {ladder}: alpha {a} flags {flagged} > {last}")
            })?;
            last = flagged;
        }
    }
    Ok(())
}

fn same_files(a: &Path, b: &Path) -> Result<(), String> {
    let mut names: Vec<PathBuf> = Vec::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for entry in std::fs::read_dir(a.join(&rel)).map_err(|e| e.to_string())? {
            let entry = entry.map_err(|e| e.to_string())?;
            let rel = rel.join(entry.file_name());
            if entry.path().is_dir() {
                stack.push(rel);
            } else if entry.file_name() != "timings.json" {
                names.push(rel);
            }
        }
    }
    ensure(!names.is_empty(), || "no output files".into())?;
    for rel in names {
        let x = std::fs::read(a.join(&rel)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(&rel)).map_err(|e| format!("{}: {e}", rel.display()))?;
        ensure(x == y, || format!("{} differs between runs", rel.display()))?;
    }
    Ok(())
}

fn determinism() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let train = tmp.path().join("train.txt");
    let test = tmp.path().join("test.txt");
    make_fixture(40, 1).unwrap().write(&train).unwrap();
    make_fixture(15, 2).unwrap().write(&test).unwrap();
    let run = |name: &str| -> Result<PathBuf, String> {
        let mut cfg = RunConfig {
            train: Some(train.clone()),
            test: Some(test.clone()),
            out: tmp.path().join(name),
            seed: 11,
            oversample: Oversample::Both,
            ..RunConfig::default()
        };
        cfg.detector.train.max_epochs = 10;
        cfg.classifier.train.max_epochs = 10;
        cfg.baseline_config.forest.n_trees = 10;
        cfg.baseline_config.adaboost.n_rounds = 10;
        cfg.baseline_config.gradient_boost.n_rounds = 10;
        cfg.baseline_config.mlp.train.max_epochs = 10;
        cmd_pipeline(&cfg).map_err(|e| e.to_string())?;
        cmd_baselines(&cfg).map_err(|e| e.to_string())?;
        Ok(cfg.out)
    };
    same_files(&run("a")?, &run("b")?)?;

    // library paths directly, compared in memory
    let ds = make_fixture(25, 9).unwrap();
    let tax = AttackTaxonomy::extended();
    let m = FittedPipeline::fit(&ds, PipelineOptions::default())
        .unwrap()
        .transform(&ds, &tax)
        .unwrap();
    let smote = SvmSmoteConfig::default();
    ensure(svm_smote(&m, &smote).unwrap() == svm_smote(&m, &smote).unwrap(), || {
        "svm_smote differs".into()
    })?;
    let attacks = m.filter(Category::is_attack);
    let mut dnn = DnnConfig::default();
    dnn.train.max_epochs = 5;
    let c1 = train_fourclass(&attacks, Some(&smote), &dnn).unwrap().0;
    let c2 = train_fourclass(&attacks, Some(&smote), &dnn).unwrap().0;
    ensure(c1.to_json().unwrap() == c2.to_json().unwrap(), || {
        "classifier differs".into()
    })?;
    let y: Vec<usize> = m.binary_labels().iter().map(|b| b.index()).collect();
    let mut bc = BaselineConfig::default();
    bc.forest.n_trees = 5;
    bc.adaboost.n_rounds = 5;
    bc.gradient_boost.n_rounds = 5;
    bc.mlp.train.max_epochs = 5;
    for b in Baseline::ALL {
        let p1 = fit_baseline(b, m.values(), &y, &bc, 3).unwrap().predict(m.values());
        let p2 = fit_baseline(b, m.values(), &y, &bc, 3).unwrap().predict(m.values());
        ensure(p1 == p2, || format!("{b} predictions differ"))?;
    }
    let (d1, _) = fit_detector(&m, &quick_detector_config(4)).unwrap();
    let (d2, _) = fit_detector(&m, &quick_detector_config(4)).unwrap();
    ensure(d1.to_json().unwrap() == d2.to_json().unwrap(), || {
        "detector differs".into()
    })?;
    let e1 = d1.detect(m.values()).unwrap();
    let e2 = d2.detect(m.values()).unwrap();
    ensure(e1 == e2, || "detector scores differ".into())?;
    let r1 = reconstruction_errors(
        &MlpModel::from_json(&c1.model.to_json().unwrap()).unwrap(),
        attacks.values(),
    );
    ensure(r1.is_ok(), || "reconstruction errors failed".into())?;
    Ok(())
}

fn property_suites() -> Outcome {
    let checks: [Check; 7] = [
        ("gradient check", gradient_check),
        ("smote segments", smote_segments),
        ("standardizer", standardizer_invariant),
        ("softmax", softmax_laws),
        ("confusion/macro=micro", confusion_laws),
        ("threshold monotonicity", detector_monotonicity),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, check) in checks {
        if let Err(e) = check() {
            failures.push(format!("{name}: {e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if failures.is_empty() {
        Pass(format!("7 suites in {secs:.1}s"))
    } else {
        Fail(failures.join("; "))
    }
}

// ---------------------------------------------------------------- real data

fn census() -> Outcome {
    let Some(data) = real_data() else {
        return Skip(NO_DATA.into());
    };
    let ds = match parse_kdd_file(&data.train, Split::Train) {
        Ok(d) => d,
        Err(e) => return Fail(e.to_string()),
    };
    let counts = ds.label_counts();
    let wrong: Vec<String> = TRAIN_ATTACK_CENSUS
        .iter()
        .filter(|(name, _, n)| counts.get(*name).copied().unwrap_or(0) != *n)
        .map(|(name, _, n)| format!("{name} {} != {n}", counts.get(*name).copied().unwrap_or(0)))
        .collect();
    if wrong.is_empty() {
        Pass(format!("{} attack types match", TRAIN_ATTACK_CENSUS.len()))
    } else {
        Fail(wrong.join(", "))
    }
}

fn imbalance_ratio() -> Outcome {
    let Some(data) = real_data() else {
        return Skip(NO_DATA.into());
    };
    let cats = match parse_kdd_file(&data.train, Split::Train).and_then(|ds| ds.categories(&AttackTaxonomy::extended()))
    {
        Ok(c) => c,
        Err(e) => return Fail(e.to_string()),
    };
    let counts: BTreeMap<Category, usize> = category_counts(&cats);
    let u2r = counts.get(&Category::U2R).copied().unwrap_or(0);
    if u2r == 0 {
        return Fail("no U2R rows".into());
    }
    let expected = [920.0, 220.0, 20.0, 1.0];
    let mut parts = Vec::new();
    let mut ok = true;
    for (c, e) in Category::ATTACKS.iter().zip(expected) {
        let ratio = counts.get(c).copied().unwrap_or(0) as f64 / u2r as f64;
        ok &= (ratio - e).abs() <= 0.10 * e;
        parts.push(format!("{ratio:.1}"));
    }
    let msg = format!("DoS:Probe:R2L:U2R = {}", parts.join(":"));
    if ok {
        Pass(msg)
    } else {
        Fail(msg)
    }
}

fn run_pipeline(data: &RealData, out: &Path) -> Result<PipelineReport, String> {
    let cfg = RunConfig {
        train: Some(data.train.clone()),
        test: Some(data.test.clone()),
        out: out.to_path_buf(),
        calibration: Calibration::LabeledF1,
        oversample: Oversample::Both,
        ..RunConfig::default()
    };
    cmd_pipeline(&cfg).map_err(|e| e.to_string())
}

fn detector_quality(report: &PipelineReport) -> Outcome {
    let m = &report.stage1.binary.attack_positive;
    let msg = format!("accuracy {:.4}, F1 {:.4}", m.accuracy, m.f1);
    if m.accuracy >= 0.82 && m.f1 >= 0.83 {
        Pass(msg)
    } else {
        Fail(msg)
    }
}

fn oversampling_effect(report: &PipelineReport) -> Outcome {
    let pick = |v: Variant| {
        report
            .stage2
            .iter()
            .find(|s| s.variant == v)
            .map(|s| &s.ground_truth_attacks)
    };
    let (Some(plain), Some(over)) = (pick(Variant::Plain), pick(Variant::Oversampled)) else {
        return Fail("pipeline did not produce both variants".into());
    };
    let d_macro = over.macro_f1 - plain.macro_f1;
    let u2r = |r: &hierids::metrics::MulticlassReport| r.f1_of(Category::U2R.as_str()).unwrap_or(0.0);
    let d_u2r = u2r(over) - u2r(plain);
    let d_acc = (over.accuracy - plain.accuracy).abs();
    let msg = format!(
        "macro F1 delta {d_macro:+.4}, U2R F1 delta {d_u2r:+.4}, |accuracy change| {:.2} pts",
        100.0 * d_acc
    );
    if d_macro >= 0.05 && d_u2r >= 0.15 && d_acc < 0.03 {
        Pass(msg)
    } else {
        Fail(msg)
    }
}

fn baselines_beat_majority(out: &Path) -> Outcome {
    let Some(data) = real_data() else {
        return Skip(NO_DATA.into());
    };
    let cfg = RunConfig {
        train: Some(data.train),
        test: Some(data.test),
        out: out.to_path_buf(),
        ..RunConfig::default()
    };
    let report = match cmd_baselines(&cfg) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let csv_rows = std::fs::read_to_string(out.join("baselines.csv"))
        .map(|t| t.lines().count() - 1)
        .unwrap_or(0);
    let losers: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.metrics.accuracy <= report.majority_accuracy)
        .map(|r| format!("{} {:.4}", r.model.display_name(), r.metrics.accuracy))
        .collect();
    if csv_rows != Baseline::ALL.len() {
        return Fail(format!("baselines.csv has {csv_rows} rows"));
    }
    if losers.is_empty() {
        Pass(format!("all 7 above majority {:.4}", report.majority_accuracy))
    } else {
        Fail(format!(
            "majority {:.4}; not above it: {}",
            report.majority_accuracy,
            losers.join(", ")
        ))
    }
}

fn main() {
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let tmp = tempfile::tempdir().expect("tempdir");

    let (c1, c3) = match real_data() {
        None => (Skip(NO_DATA.into()), Skip(NO_DATA.into())),
        Some(data) => match run_pipeline(&data, &tmp.path().join("pipeline")) {
            Ok(r) => (detector_quality(&r), oversampling_effect(&r)),
            Err(e) => (Fail(e.clone()), Fail(e)),
        },
    };
    results.push((1, "autoencoder accuracy/F1 with labeled-F1 calibration", c1));
    results.push((2, "F1 identity on the reference binary table", f1_identity()));
    results.push((3, "SVM-SMOTE effect on macro and U2R F1", c3));
    results.push((4, "training-set attack census", census()));
    results.push((5, "4-class imbalance ratio", imbalance_ratio()));
    results.push((6, "property suites", property_suites()));
    results.push((
        7,
        "baselines beat majority class",
        baselines_beat_majority(&tmp.path().join("baselines")),
    ));

    let mut failed = false;
    for (n, what, outcome) in &results {
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed = true;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {n}: {tag} - {what}: {detail}");
    }
    if failed {
        std::process::exit(1);
    }
}
