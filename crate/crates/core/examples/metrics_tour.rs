//! Confusion matrices and the F1 family: binary precision/recall/F1,
//! per-class F1, macro F1, and the support-weighted "micro" F1.
//!
//! `cargo run --example metrics_tour`

use hierids::dataset::Category;
use hierids::metrics::{binary_report, confusion, f1_score, multiclass_report};

fn main() -> hierids::Result<()> {
    run()
}

pub fn run() -> hierids::Result<()> {
    println!("F1(0.6816, 0.8309) = {:.4}", f1_score(0.6816, 0.8309));

    let truth = [1, 1, 1, 0, 0, 0, 0, 1];
    let pred = [1, 0, 1, 0, 1, 0, 0, 1];
    let report = binary_report(confusion(&truth, &pred, &[0, 1])?)?;
    let m = &report.attack_positive;
    println!("binary: tp {} fp {} fn {} tn {}", m.tp, m.fp, m.fn_, m.tn);
    println!(
        "accuracy {:.3}, precision {:.3}, recall {:.3}, F1 {:.3}",
        m.accuracy, m.precision, m.recall, m.f1
    );

    use Category::{DoS, Probe, R2L, U2R};
    let truth = [DoS, DoS, DoS, DoS, DoS, DoS, Probe, Probe, Probe, R2L, R2L, U2R];
    let pred = [DoS, DoS, DoS, DoS, DoS, Probe, Probe, Probe, DoS, R2L, DoS, R2L];
    let cm = confusion(&truth, &pred, &Category::ATTACKS)?;
    print!("{}", cm.to_csv());
    let r = multiclass_report(cm)?;
    for c in &r.per_class {
        println!(
            "{:>5}: P {:.3} R {:.3} F1 {:.3} (support {})",
            c.label, c.precision, c.recall, c.f1, c.support
        );
    }
    println!(
        "accuracy {:.3}, macro F1 {:.3}, weighted F1 {:.3}, pooled F1 {:.3}",
        r.accuracy, r.macro_f1, r.micro_f1, r.pooled_f1
    );
    Ok(())
}
