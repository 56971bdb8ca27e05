use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Variant;
use crate::dataset::{BinaryLabel, Category};
use crate::detector::Calibration;
use crate::metrics::{BinaryReport, MulticlassReport};

/// Final outcome of one test row in the two-stage hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    Normal,
    Attack(Category),
    /// Flagged by stage one but labeled normal.
    FalsePositiveNormal,
}

impl Disposition {
    pub fn resolve(verdict: BinaryLabel, truth: Category, predicted: Category) -> Disposition {
        match verdict {
            BinaryLabel::Normal => Disposition::Normal,
            BinaryLabel::Attack if truth == Category::Normal => Disposition::FalsePositiveNormal,
            BinaryLabel::Attack => Disposition::Attack(predicted),
        }
    }
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disposition::Normal => f.write_str("normal"),
            Disposition::Attack(c) => write!(f, "{c}"),
            Disposition::FalsePositiveNormal => f.write_str("false-positive-normal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Report {
    pub calibration: Calibration,
    pub alpha: f64,
    pub rows: usize,
    pub predicted_attacks: usize,
    pub binary: BinaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Report {
    pub variant: Variant,
    /// Every test row whose true label is an attack.
    pub ground_truth_attacks: MulticlassReport,
    /// Stage-one attack verdicts whose true label is an attack.
    pub survivors: Option<MulticlassReport>,
    pub survivor_attacks: usize,
    /// Stage-one attack verdicts whose true label is normal.
    pub false_positive_normals: usize,
    /// Final disposition counts over all test rows, keyed by name.
    pub dispositions: BTreeMap<String, usize>,
}

impl Stage2Report {
    pub fn forwarded(&self) -> usize {
        self.survivor_attacks + self.false_positive_normals
    }
}

/// Wall-clock seconds per stage; kept out of the deterministic report file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub preprocess_s: f64,
    pub stage1_s: f64,
    pub stage2_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub test_rows: usize,
    pub stage1: Stage1Report,
    pub stage2: Vec<Stage2Report>,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl PipelineReport {
    /// `model,accuracy,precision,recall,f1` with the detector row.
    pub fn table2_csv(&self) -> String {
        let m = &self.stage1.binary.attack_positive;
        format!(
            "model,accuracy,precision,recall,f1\nAutoencoder,{},{},{},{}\n",
            m.accuracy, m.precision, m.recall, m.f1
        )
    }

    /// One row per (variant, evaluation subset) with per-class F1,
    /// macro/micro F1 and accuracy.
    pub fn table3_csv(&self) -> String {
        let mut out = String::from("variant,subset,f1_dos,f1_probe,f1_r2l,f1_u2r,macro_f1,micro_f1,accuracy\n");
        for s in &self.stage2 {
            let mut row = |subset: &str, r: &MulticlassReport| {
                let _ = write!(out, "{},{subset}", s.variant);
                for c in Category::ATTACKS {
                    let _ = write!(out, ",{}", r.f1_of(c.as_str()).unwrap_or(0.0));
                }
                let _ = writeln!(out, ",{},{},{}", r.macro_f1, r.micro_f1, r.accuracy);
            };
            row("ground_truth_attacks", &s.ground_truth_attacks);
            if let Some(r) = &s.survivors {
                row("stage1_survivors", r);
            }
        }
        out
    }
}
