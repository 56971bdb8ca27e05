//! NSL-KDD ingestion: the 41-feature schema, record parsing and
//! serialization, the attack taxonomy, and a deterministic synthetic
//! fixture generator for tests and examples.

mod fixture;
mod schema;
mod taxonomy;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

pub use fixture::{make_fixture, FixtureSpec};
pub use schema::{FeatureGroup, FeatureKind, FeatureSchema, FeatureSpec, CATEGORICAL, FEATURES, N_FEATURES};
pub use taxonomy::{AttackTaxonomy, BinaryLabel, Category, TRAIN_ATTACK_CENSUS};

use crate::error::{IdsError, Result};

/// Number of comma-separated fields on one NSL-KDD line.
pub const N_FIELDS: usize = N_FEATURES + 2;

pub const DIFFICULTY_MAX: u8 = 21;

/// One NSL-KDD connection: 41 raw feature values, the label, and the
/// difficulty level. Raw text is kept so records re-serialize exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRecord {
    raw: Vec<String>,
    numeric: Vec<f64>,
    label: String,
    difficulty: u8,
}

impl ConnectionRecord {
    pub fn from_fields<S: AsRef<str>>(features: &[S], label: &str, difficulty: u8) -> Result<Self> {
        if features.len() != N_FEATURES {
            return Err(IdsError::InvalidInput(format!(
                "expected {N_FEATURES} feature values, found {}",
                features.len()
            )));
        }
        if difficulty > DIFFICULTY_MAX {
            return Err(IdsError::InvalidInput(format!(
                "difficulty {difficulty} outside 0..={DIFFICULTY_MAX}"
            )));
        }
        let mut raw = Vec::with_capacity(N_FEATURES);
        let mut numeric = Vec::with_capacity(N_FEATURES);
        for (spec, value) in FEATURES.iter().zip(features) {
            let value = value.as_ref();
            if spec.kind == FeatureKind::Categorical {
                if value.is_empty() {
                    return Err(IdsError::InvalidInput(format!("empty value for {}", spec.name)));
                }
                numeric.push(0.0);
            } else {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| IdsError::InvalidInput(format!("{}: '{value}' is not a number", spec.name)))?;
                if !v.is_finite() || v < 0.0 {
                    return Err(IdsError::InvalidInput(format!(
                        "{}: '{value}' is not a finite non-negative number",
                        spec.name
                    )));
                }
                numeric.push(v);
            }
            raw.push(value.to_string());
        }
        if label.is_empty() {
            return Err(IdsError::InvalidInput("empty label".into()));
        }
        Ok(ConnectionRecord {
            raw,
            numeric,
            label: label.to_string(),
            difficulty,
        })
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != N_FIELDS {
            return Err(IdsError::InvalidInput(format!(
                "expected {N_FIELDS} fields, found {}",
                fields.len()
            )));
        }
        let difficulty: u8 = fields[N_FIELDS - 1]
            .trim()
            .parse()
            .map_err(|_| IdsError::InvalidInput(format!("difficulty '{}' is not an integer", fields[N_FIELDS - 1])))?;
        Self::from_fields(&fields[..N_FEATURES], fields[N_FEATURES], difficulty)
    }

    pub fn to_line(&self) -> String {
        let mut line = self.raw.join(",");
        let _ = write!(line, ",{},{}", self.label, self.difficulty);
        line
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn difficulty(&self) -> u8 {
        self.difficulty
    }

    pub fn raw(&self, index: usize) -> &str {
        &self.raw[index]
    }

    /// Numeric value of a non-categorical feature (0.0 at categorical slots).
    pub fn numeric(&self, index: usize) -> f64 {
        self.numeric[index]
    }

    pub fn numeric_values(&self) -> &[f64] {
        &self.numeric
    }

    pub fn protocol_type(&self) -> &str {
        &self.raw[1]
    }

    pub fn service(&self) -> &str {
        &self.raw[2]
    }

    pub fn flag(&self) -> &str {
        &self.raw[3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Fixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    records: Vec<ConnectionRecord>,
    split: Split,
}

impl LabeledDataset {
    pub fn new(records: Vec<ConnectionRecord>, split: Split) -> Result<Self> {
        if records.is_empty() {
            return Err(IdsError::InvalidInput("dataset has no records".into()));
        }
        Ok(LabeledDataset { records, split })
    }

    pub fn records(&self) -> &[ConnectionRecord] {
        &self.records
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<ConnectionRecord> {
        self.records
    }

    /// Writes the dataset in the 43-field text format, one record per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| IdsError::io(path, e))
    }

    /// Category of every record. All unknown labels are reported at once.
    pub fn categories(&self, taxonomy: &AttackTaxonomy) -> Result<Vec<Category>> {
        categorize_all(self.records.iter(), taxonomy)
    }

    /// Per-label record counts.
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.label.clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// Parses NSL-KDD text. Lines must have 43 fields; trailing blank lines
/// are ignored, interior blank lines are errors.
pub fn parse_kdd_str(text: &str, origin: &str, split: Split) -> Result<LabeledDataset> {
    let body = text.trim_end_matches(['\n', '\r', ' ', '\t']);
    if body.is_empty() {
        return Err(IdsError::InvalidInput(format!("{origin}: empty file")));
    }
    let mut records = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let record = ConnectionRecord::parse_line(line).map_err(|e| IdsError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: match e {
                IdsError::InvalidInput(m) => m,
                other => other.to_string(),
            },
        })?;
        records.push(record);
    }
    LabeledDataset::new(records, split)
}

pub fn parse_kdd_file(path: &Path, split: Split) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
    parse_kdd_str(&text, &path.display().to_string(), split)
}

pub fn categorize(label: &str, taxonomy: &AttackTaxonomy) -> Result<Category> {
    taxonomy.categorize(label)
}

fn categorize_all<'a>(
    records: impl Iterator<Item = &'a ConnectionRecord>,
    taxonomy: &AttackTaxonomy,
) -> Result<Vec<Category>> {
    let mut out = Vec::new();
    let mut unknown = std::collections::BTreeSet::new();
    for r in records {
        match taxonomy.categorize(&r.label) {
            Ok(c) => out.push(c),
            Err(_) => {
                unknown.insert(r.label.clone());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(IdsError::UnknownLabel(unknown.into_iter().collect()));
    }
    Ok(out)
}

pub fn binary_labels(ds: &LabeledDataset, taxonomy: &AttackTaxonomy) -> Result<Vec<BinaryLabel>> {
    Ok(ds.categories(taxonomy)?.into_iter().map(BinaryLabel::from).collect())
}

/// Four-class labels for attack-only records. A normal record is an error.
pub fn fourclass_labels<'a>(
    records: impl IntoIterator<Item = &'a ConnectionRecord>,
    taxonomy: &AttackTaxonomy,
) -> Result<Vec<Category>> {
    let cats = categorize_all(records.into_iter(), taxonomy)?;
    if let Some(pos) = cats.iter().position(|c| !c.is_attack()) {
        return Err(IdsError::InvalidInput(format!(
            "record {pos} is normal traffic; four-class labels require attack records only"
        )));
    }
    Ok(cats)
}

/// Counts of each category among the dataset's records.
pub fn category_counts(cats: &[Category]) -> BTreeMap<Category, usize> {
    let mut counts = BTreeMap::new();
    for &c in cats {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts
}

/// Lower-case hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| IdsError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Checks files in `dir` against a `SHA256SUMS` manifest
/// (`<hex digest>  <file name>` per line, as written by `sha256sum`).
/// Returns the names that were verified.
pub fn verify_checksums(dir: &Path) -> Result<Vec<String>> {
    let manifest = dir.join("SHA256SUMS");
    let text = std::fs::read_to_string(&manifest).map_err(|e| IdsError::io(&manifest, e))?;
    let mut verified = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (digest, name) = line.split_once(char::is_whitespace).ok_or_else(|| IdsError::Parse {
            path: manifest.display().to_string(),
            line: i + 1,
            message: "expected `<digest>  <file>`".into(),
        })?;
        let name = name.trim().trim_start_matches('*');
        let actual = sha256_file(&dir.join(name))?;
        if !actual.eq_ignore_ascii_case(digest) {
            return Err(IdsError::InvalidInput(format!(
                "checksum mismatch for {name}: expected {digest}, got {actual}"
            )));
        }
        verified.push(name.to_string());
    }
    Ok(verified)
}
