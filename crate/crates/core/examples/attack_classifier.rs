//! Stage two alone: the four-class attack network trained with and
//! without SVM-SMOTE, scored on held-out attacks.
//!
//! `cargo run --example attack_classifier`

use std::path::Path;

use hierids::classifier::{evaluate_fourclass, train_fourclass, AttackClassifier, DnnConfig, CLASS_ORDER};
use hierids::dataset::{AttackTaxonomy, FixtureSpec};
use hierids::preprocess::{FittedPipeline, PipelineOptions};
use hierids::resample::SvmSmoteConfig;

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("attack_classifier"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;
    let tax = AttackTaxonomy::extended();
    let spec = |counts, seed| {
        FixtureSpec {
            counts,
            spread: 2.5,
            seed,
        }
        .generate()
    };
    let train_ds = spec([0, 500, 150, 40, 8], 1)?;
    let test_ds = spec([0, 100, 60, 60, 20], 2)?;
    let pipeline = FittedPipeline::fit(&train_ds, PipelineOptions::default())?;
    let train = pipeline.transform(&train_ds, &tax)?;
    let test = pipeline.transform(&test_ds, &tax)?;

    let mut cfg = DnnConfig::default();
    cfg.train.max_epochs = 40;
    let smote = SvmSmoteConfig::default();
    for oversample in [None, Some(&smote)] {
        let (clf, report) = train_fourclass(&train, oversample, &cfg)?;
        let eval = evaluate_fourclass(&clf, &test)?;
        println!(
            "{}: {} synthetic rows, accuracy {:.3}, macro F1 {:.3}, weighted F1 {:.3}",
            if report.oversampled { "oversampled" } else { "plain" },
            report.synthetic_rows,
            eval.accuracy,
            eval.macro_f1,
            eval.micro_f1
        );
        for c in CLASS_ORDER {
            print!("  {c} {:.3}", eval.f1_of(c.as_str()).unwrap_or(0.0));
        }
        println!();

        let path = work.join("classifier.json");
        clf.save(&path)?;
        let reloaded = AttackClassifier::load(&path)?;
        let p = &reloaded.predict(test.values())?[0];
        println!(
            "  first test row -> {} {:?}",
            p.category,
            p.probabilities.map(|v| (v * 1000.0).round() / 1000.0)
        );
    }
    Ok(())
}
