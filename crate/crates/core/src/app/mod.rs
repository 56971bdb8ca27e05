//! Command orchestration: run configuration, the six commands, and the
//! command-line front end used by the `hierids` binary.

mod cli;
mod commands;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cli::{run_cli, Cli, Command, CommonArgs};
pub use commands::{
    cmd_baselines, cmd_evaluate, cmd_explore, cmd_pipeline, cmd_train_binary, cmd_train_multiclass, BaselineRow,
    BaselinesReport,
};
pub use report::{Disposition, PipelineReport, Stage1Report, Stage2Report, StageTimings};

use crate::baselines::{Baseline, BaselineConfig};
use crate::classifier::DnnConfig;
use crate::dataset::AttackTaxonomy;
use crate::detector::{Calibration, DetectorConfig};
use crate::error::{IdsError, Result};
use crate::explore::ExploreConfig;
use crate::resample::SvmSmoteConfig;

/// Which stage-two variants to train or evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Oversample {
    On,
    Off,
    #[default]
    Both,
}

impl Oversample {
    pub fn variants(self) -> &'static [Variant] {
        match self {
            Oversample::On => &[Variant::Oversampled],
            Oversample::Off => &[Variant::Plain],
            Oversample::Both => &[Variant::Plain, Variant::Oversampled],
        }
    }
}

impl FromStr for Oversample {
    type Err = IdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" => Ok(Oversample::On),
            "off" => Ok(Oversample::Off),
            "both" => Ok(Oversample::Both),
            other => Err(IdsError::Config(format!(
                "oversample must be on, off or both, not '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Oversampled,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Oversampled => "oversampled",
        }
    }

    pub fn model_file(self) -> &'static str {
        match self {
            Variant::Plain => "classifier_plain.json",
            Variant::Oversampled => "classifier_oversampled.json",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a command needs. Loaded from JSON, then overridden by
/// command-line flags. `seed` is pushed into every seeded component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Label-to-category CSV; the built-in extended taxonomy when absent.
    pub taxonomy: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub calibration: Calibration,
    pub oversample: Oversample,
    pub drop_constant: bool,
    pub detector: DetectorConfig,
    pub classifier: DnnConfig,
    pub smote: SvmSmoteConfig,
    pub baselines: Vec<Baseline>,
    pub baseline_config: BaselineConfig,
    pub explore: ExploreConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: None,
            test: None,
            taxonomy: None,
            out: PathBuf::from("out"),
            seed: 0,
            calibration: Calibration::default(),
            oversample: Oversample::default(),
            drop_constant: false,
            detector: DetectorConfig::default(),
            classifier: DnnConfig::default(),
            smote: SvmSmoteConfig::default(),
            baselines: Baseline::ALL.to_vec(),
            baseline_config: BaselineConfig::default(),
            explore: ExploreConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| IdsError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        RunConfig::from_json(&text).map_err(|e| IdsError::Config(format!("{}: {e}", path.display())))
    }

    pub fn train_path(&self) -> Result<&Path> {
        self.train
            .as_deref()
            .ok_or_else(|| IdsError::Config("no training file given (--train)".into()))
    }

    pub fn test_path(&self) -> Result<&Path> {
        self.test
            .as_deref()
            .ok_or_else(|| IdsError::Config("no test file given (--test)".into()))
    }

    pub fn load_taxonomy(&self) -> Result<AttackTaxonomy> {
        match &self.taxonomy {
            Some(p) => AttackTaxonomy::from_file(p),
            None => Ok(AttackTaxonomy::extended()),
        }
    }

    pub fn detector_config(&self) -> DetectorConfig {
        let mut d = self.detector.clone();
        d.calibration = self.calibration;
        d.train.seed = self.seed;
        d
    }

    pub fn classifier_config(&self) -> DnnConfig {
        let mut c = self.classifier.clone();
        c.train.seed = self.seed;
        c
    }

    pub fn smote_config(&self) -> SvmSmoteConfig {
        let mut s = self.smote.clone();
        s.base.seed = self.seed;
        s.svm.seed = self.seed;
        s
    }

    pub fn ensure_out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| IdsError::io(&self.out, e))?;
        Ok(&self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_json() {
        let c = RunConfig::from_json(r#"{"seed": 9, "oversample": "on", "calibration": {"method": "labeled_f1"}}"#)
            .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.oversample, Oversample::On);
        assert_eq!(c.calibration, Calibration::LabeledF1);
        assert_eq!(c.baselines.len(), 7);
        assert_eq!(c.detector_config().train.seed, 9);
        assert_eq!(c.detector_config().calibration, Calibration::LabeledF1);
        assert_eq!(c.smote_config().svm.seed, 9);
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let err = RunConfig::from_json(r#"{"sede": 1}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = RunConfig::from_json(r#"{"baselines": ["knn"]}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn oversample_variants() {
        assert_eq!(
            "both".parse::<Oversample>().unwrap().variants(),
            &[Variant::Plain, Variant::Oversampled]
        );
        assert!("maybe".parse::<Oversample>().is_err());
    }
}
