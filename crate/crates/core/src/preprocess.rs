//! Fit-on-train feature transformation: LabelCount encoding of the three
//! categorical columns followed by z-score standardization of every
//! column.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{AttackTaxonomy, BinaryLabel, Category, LabeledDataset, Split, CATEGORICAL, FEATURES, N_FEATURES};
use crate::error::{IdsError, Result};

/// Code given to categories never seen while fitting.
pub const UNSEEN_CODE: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub count: u64,
    pub code: u32,
}

/// Frequency-rank codes for one categorical feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryCodes {
    pub feature: &'static str,
    pub column: usize,
    pub entries: BTreeMap<String, CodeEntry>,
}

impl CategoryCodes {
    /// Codes run 1..=K in ascending frequency; equal counts are ordered by
    /// category name, smaller name first.
    pub fn from_counts(feature: &'static str, column: usize, counts: BTreeMap<String, u64>) -> Self {
        let mut ranked: Vec<(&String, u64)> = counts.iter().map(|(k, &v)| (k, v)).collect();
        ranked.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        let entries = ranked
            .into_iter()
            .enumerate()
            .map(|(i, (name, count))| {
                (
                    name.clone(),
                    CodeEntry {
                        count,
                        code: i as u32 + 1,
                    },
                )
            })
            .collect();
        CategoryCodes {
            feature,
            column,
            entries,
        }
    }

    pub fn code(&self, category: &str) -> u32 {
        self.entries.get(category).map_or(UNSEEN_CODE, |e| e.code)
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, e)| e.code == code)
            .map(|(k, _)| k.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCountEncoder {
    pub tables: Vec<CategoryCodes>,
}

impl LabelCountEncoder {
    pub fn table(&self, feature: &str) -> Option<&CategoryCodes> {
        self.tables.iter().find(|t| t.feature == feature)
    }
}

pub fn fit_encoder(train: &LabeledDataset) -> LabelCountEncoder {
    let tables = CATEGORICAL
        .iter()
        .map(|&col| {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for r in train.records() {
                *counts.entry(r.raw(col).to_string()).or_insert(0) += 1;
            }
            CategoryCodes::from_counts(FEATURES[col].name, col, counts)
        })
        .collect();
    LabelCountEncoder { tables }
}

/// Numeric matrix with categorical columns replaced by their codes.
pub fn encode(enc: &LabelCountEncoder, ds: &LabeledDataset) -> Array2<f64> {
    let mut out = Array2::zeros((ds.len(), N_FEATURES));
    for (i, r) in ds.records().iter().enumerate() {
        let mut row = out.row_mut(i);
        for (j, v) in r.numeric_values().iter().enumerate() {
            row[j] = *v;
        }
        for t in &enc.tables {
            row[t.column] = t.code(r.raw(t.column)) as f64;
        }
    }
    out
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn fit_standardizer(matrix: &Array2<f64>) -> Result<Standardizer> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(IdsError::InvalidInput("cannot fit a standardizer on zero rows".into()));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(IdsError::InvalidInput("non-finite value in standardizer input".into()));
    }
    let mut mu = Vec::with_capacity(matrix.ncols());
    let mut sigma = Vec::with_capacity(matrix.ncols());
    for col in matrix.axis_iter(Axis(1)) {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // a constant column must come out exactly 0 even when the mean
        // carries rounding error
        let constant = col.iter().all(|&x| x == col[0]);
        mu.push(if constant { col[0] } else { mean });
        sigma.push(if constant { 0.0 } else { var.sqrt() });
    }
    Ok(Standardizer { mu, sigma })
}

impl Standardizer {
    /// Z = (x - mu) / sigma per cell; sigma = 0 columns map to 0.
    pub fn transform(&self, matrix: &Array2<f64>) -> Result<Array2<f64>> {
        if matrix.ncols() != self.mu.len() {
            return Err(IdsError::Shape(format!(
                "standardizer fitted on {} columns, got {}",
                self.mu.len(),
                matrix.ncols()
            )));
        }
        let mut out = matrix.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (mu, sigma) = (self.mu[j], self.sigma[j]);
            if sigma == 0.0 {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|x| (x - mu) / sigma);
            }
        }
        Ok(out)
    }
}

/// Encoded, standardized features with a row-aligned category vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    categories: Vec<Category>,
    split: Split,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, categories: Vec<Category>, split: Split) -> Result<Self> {
        if values.nrows() != categories.len() {
            return Err(IdsError::Shape(format!(
                "{} rows but {} labels",
                values.nrows(),
                categories.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IdsError::InvalidInput(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(FeatureMatrix {
            values,
            categories,
            split,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn binary_labels(&self) -> Vec<BinaryLabel> {
        self.categories.iter().map(|&c| c.into()).collect()
    }

    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(0), rows),
            categories: rows.iter().map(|&i| self.categories[i]).collect(),
            split: self.split,
        }
    }

    pub fn filter(&self, keep: impl Fn(Category) -> bool) -> FeatureMatrix {
        let rows: Vec<usize> = (0..self.nrows()).filter(|&i| keep(self.categories[i])).collect();
        self.select(&rows)
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<Category>) {
        (self.values, self.categories)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Drop zero-variance columns after standardizing. Off by default so
    /// the model input stays 41 wide.
    pub drop_constant: bool,
}

/// Frozen preprocessing state fitted on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub encoder: LabelCountEncoder,
    pub standardizer: Standardizer,
    pub options: PipelineOptions,
}

impl FittedPipeline {
    pub fn fit(train: &LabeledDataset, options: PipelineOptions) -> Result<Self> {
        let encoder = fit_encoder(train);
        let standardizer = fit_standardizer(&encode(&encoder, train))?;
        Ok(FittedPipeline {
            encoder,
            standardizer,
            options,
        })
    }

    /// Columns kept in the output matrix.
    pub fn kept_columns(&self) -> Vec<usize> {
        (0..N_FEATURES)
            .filter(|&j| !self.options.drop_constant || self.standardizer.sigma[j] != 0.0)
            .collect()
    }

    pub fn output_width(&self) -> usize {
        self.kept_columns().len()
    }

    pub fn transform_values(&self, ds: &LabeledDataset) -> Result<Array2<f64>> {
        let z = self.standardizer.transform(&encode(&self.encoder, ds))?;
        if self.options.drop_constant {
            Ok(z.select(Axis(1), &self.kept_columns()))
        } else {
            Ok(z)
        }
    }

    pub fn transform(&self, ds: &LabeledDataset, taxonomy: &AttackTaxonomy) -> Result<FeatureMatrix> {
        let categories = ds.categories(taxonomy)?;
        FeatureMatrix::new(self.transform_values(ds)?, categories, ds.split())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PipelineFile {
            format_version: crate::FORMAT_VERSION,
            drop_constant: self.options.drop_constant,
            features: FEATURES
                .iter()
                .map(|f| FeatureStats {
                    name: f.name.to_string(),
                    mu: self.standardizer.mu[f.index],
                    sigma: self.standardizer.sigma[f.index],
                })
                .collect(),
            categorical: self
                .encoder
                .tables
                .iter()
                .map(|t| {
                    let m = t.entries.iter().map(|(k, e)| (k.clone(), (e.count, e.code))).collect();
                    (t.feature.to_string(), m)
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PipelineFile = serde_json::from_str(text)?;
        crate::check_version("pipeline", file.format_version)?;
        if file.features.len() != N_FEATURES {
            return Err(IdsError::InvalidInput(format!(
                "pipeline has {} features, expected {N_FEATURES}",
                file.features.len()
            )));
        }
        for (f, spec) in file.features.iter().zip(FEATURES.iter()) {
            if f.name != spec.name {
                return Err(IdsError::InvalidInput(format!(
                    "pipeline feature '{}' where '{}' was expected",
                    f.name, spec.name
                )));
            }
            if !(f.sigma >= 0.0) || !f.mu.is_finite() {
                return Err(IdsError::InvalidInput(format!("bad statistics for {}", f.name)));
            }
        }
        let mut tables = Vec::new();
        for &col in &CATEGORICAL {
            let name = FEATURES[col].name;
            let m = file
                .categorical
                .get(name)
                .ok_or_else(|| IdsError::InvalidInput(format!("pipeline lacks codes for {name}")))?;
            let entries = m
                .iter()
                .map(|(k, &(count, code))| (k.clone(), CodeEntry { count, code }))
                .collect();
            tables.push(CategoryCodes {
                feature: name,
                column: col,
                entries,
            });
        }
        Ok(FittedPipeline {
            encoder: LabelCountEncoder { tables },
            standardizer: Standardizer {
                mu: file.features.iter().map(|f| f.mu).collect(),
                sigma: file.features.iter().map(|f| f.sigma).collect(),
            },
            options: PipelineOptions {
                drop_constant: file.drop_constant,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| IdsError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureStats {
    name: String,
    mu: f64,
    sigma: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PipelineFile {
    format_version: u32,
    drop_constant: bool,
    features: Vec<FeatureStats>,
    categorical: BTreeMap<String, BTreeMap<String, (u64, u32)>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_fixture, ConnectionRecord};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    /// Independent oracle: rank by frequency, assigning 1..K.
    fn rank_oracle(pairs: &[(&str, u64)]) -> BTreeMap<String, u32> {
        let mut v = pairs.to_vec();
        // bubble sort on (count, name), deliberately naive
        for i in 0..v.len() {
            for j in 0..v.len() - 1 - i {
                if (v[j].1, v[j].0) > (v[j + 1].1, v[j + 1].0) {
                    v.swap(j, j + 1);
                }
            }
        }
        v.iter()
            .enumerate()
            .map(|(i, (k, _))| (k.to_string(), i as u32 + 1))
            .collect()
    }

    #[test]
    fn codes_ascend_with_frequency() {
        let pairs = [("tcp", 3), ("udp", 2), ("icmp", 1)];
        let t = CategoryCodes::from_counts("protocol_type", 1, counts(&pairs));
        let oracle = rank_oracle(&pairs);
        assert_eq!(oracle["tcp"], 3);
        for (k, code) in oracle {
            assert_eq!(t.code(&k), code);
        }
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = CategoryCodes::from_counts("flag", 3, counts(&[("b", 2), ("a", 2)]));
        assert_eq!(t.code("a"), 1);
        assert_eq!(t.code("b"), 2);
        let single = CategoryCodes::from_counts("flag", 3, counts(&[("x", 5)]));
        assert_eq!(single.code("x"), 1);
        assert_eq!(single.code("never"), UNSEEN_CODE);
        assert_eq!(single.decode(1), Some("x"));
    }

    #[test]
    fn standardizer_hand_values() {
        let m = array![[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]];
        let s = fit_standardizer(&m).unwrap();
        assert_abs_diff_eq!(s.mu[0], 4.0);
        assert_abs_diff_eq!(s.sigma[0], (8.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.sigma[0], 1.63299, epsilon = 1e-5);
        assert_eq!((s.mu[1], s.sigma[1]), (5.0, 0.0));
        let z = s.transform(&m).unwrap();
        assert_abs_diff_eq!(z[[0, 0]], -1.2247, epsilon = 1e-4);
        assert_abs_diff_eq!(z[[1, 0]], 0.0);
        assert_abs_diff_eq!(z[[2, 0]], 1.2247, epsilon = 1e-4);
        assert!(z.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardizer_edge_cases() {
        let one = array![[1.0, -3.0, 7.5]];
        let s = fit_standardizer(&one).unwrap();
        assert!(s.sigma.iter().all(|&x| x == 0.0));
        assert!(fit_standardizer(&Array2::zeros((0, 3))).is_err());
        assert!(fit_standardizer(&array![[1.0], [f64::NAN]]).is_err());
        assert!(matches!(s.transform(&array![[1.0, 2.0]]), Err(IdsError::Shape(_))));
        // a constant column transforms to zero whatever values it is given
        let c = fit_standardizer(&array![[5.0], [5.0]]).unwrap();
        assert!(c.transform(&array![[9.0], [-1.0]]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn encode_uses_codes_and_zero_for_unseen() {
        let train = make_fixture(10, 1).unwrap();
        let enc = fit_encoder(&train);
        let m = encode(&enc, &train);
        assert_eq!(m, encode(&enc, &train));
        let r = &train.records()[0];
        assert_eq!(m[[0, 1]], enc.tables[0].code(r.protocol_type()) as f64);
        assert_eq!(m[[0, 4]], r.numeric(4));

        let mut fields: Vec<String> = (0..41).map(|j| r.raw(j).to_string()).collect();
        fields[2] = "gopher_never_seen".into();
        let rec = ConnectionRecord::from_fields(&fields, "normal", 0).unwrap();
        let ds = LabeledDataset::new(vec![rec], Split::Test).unwrap();
        assert_eq!(encode(&enc, &ds)[[0, 2]], 0.0);
    }

    #[test]
    fn refit_on_decoded_categories_is_idempotent() {
        let train = make_fixture(15, 4).unwrap();
        let enc = fit_encoder(&train);
        let m = encode(&enc, &train);
        let decoded: Vec<ConnectionRecord> = train
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut fields: Vec<String> = (0..41).map(|j| r.raw(j).to_string()).collect();
                for t in &enc.tables {
                    fields[t.column] = t.decode(m[[i, t.column]] as u32).unwrap().to_string();
                }
                ConnectionRecord::from_fields(&fields, r.label(), r.difficulty()).unwrap()
            })
            .collect();
        let again = fit_encoder(&LabeledDataset::new(decoded, Split::Train).unwrap());
        assert_eq!(again, enc);
    }

    #[test]
    fn pipeline_transform_does_not_touch_state() {
        let tax = AttackTaxonomy::training();
        let train = make_fixture(10, 1).unwrap();
        let test = make_fixture(10, 2).unwrap();
        let p = FittedPipeline::fit(&train, PipelineOptions::default()).unwrap();
        let before = p.clone();
        let fm = p.transform(&test, &tax).unwrap();
        assert_eq!(p, before);
        assert_eq!(fm.ncols(), 41);
        assert_eq!(fm.nrows(), 50);
    }

    #[test]
    fn drop_constant_removes_zero_variance_columns() {
        let train = make_fixture(10, 1).unwrap();
        let p = FittedPipeline::fit(&train, PipelineOptions { drop_constant: true }).unwrap();
        let kept = p.kept_columns();
        assert!(!kept.contains(&19) && !kept.contains(&20));
        assert_eq!(p.transform_values(&train).unwrap().ncols(), kept.len());
    }

    #[test]
    fn json_golden_and_round_trip() {
        let mut tables = Vec::new();
        for &col in &CATEGORICAL {
            tables.push(CategoryCodes::from_counts(
                FEATURES[col].name,
                col,
                counts(&[("a", 2), ("b", 1)]),
            ));
        }
        let p = FittedPipeline {
            encoder: LabelCountEncoder { tables },
            standardizer: Standardizer {
                mu: vec![0.5; 41],
                sigma: vec![2.0; 41],
            },
            options: PipelineOptions::default(),
        };
        let json = p.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(
            v["features"][0],
            serde_json::json!({"name": "duration", "mu": 0.5, "sigma": 2.0})
        );
        assert_eq!(v["categorical"]["service"]["a"], serde_json::json!([2, 2]));
        assert_eq!(v["categorical"]["flag"]["b"], serde_json::json!([1, 1]));
        assert_eq!(FittedPipeline::from_json(&json).unwrap(), p);

        let bumped = json.replace("\"format_version\": 1", "\"format_version\": 7");
        assert!(matches!(
            FittedPipeline::from_json(&bumped),
            Err(IdsError::VersionMismatch { found: 7, .. })
        ));
    }
}
