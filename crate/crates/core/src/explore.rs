//! Exploration exports: per-class histograms, Pearson correlations,
//! scatter-pair CSVs and a constant-feature report. Categorical columns
//! are label-count encoded first; nothing is standardized.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttackTaxonomy, Category, LabeledDataset, FEATURES};
use crate::error::{IdsError, Result};
use crate::preprocess::{encode, fit_encoder};

pub const DEFAULT_BINS: usize = 40;

/// Encoded (unscaled) feature values, one column per schema feature.
pub fn raw_matrix(ds: &LabeledDataset) -> Array2<f64> {
    encode(&fit_encoder(ds), ds)
}

fn feature_index(name: &str) -> Result<usize> {
    FEATURES
        .iter()
        .position(|f| f.name == name)
        .ok_or_else(|| IdsError::Config(format!("unknown feature '{name}'")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub feature: String,
    /// `bins + 1` strictly increasing edges; the last bin is right-closed.
    pub edges: Vec<f64>,
    pub counts: BTreeMap<Category, Vec<u64>>,
}

/// Uniform bins over the pooled range, counted per category.
pub fn histogram(feature: &str, values: &[f64], categories: &[Category], bins: usize) -> Result<HistogramReport> {
    if bins == 0 {
        return Err(IdsError::Config("bins must be >= 1".into()));
    }
    if values.is_empty() {
        return Err(IdsError::InvalidInput("histogram of an empty dataset".into()));
    }
    if values.len() != categories.len() {
        return Err(IdsError::Shape("one category per value required".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * width })
        .collect();
    let mut counts: BTreeMap<Category, Vec<u64>> = BTreeMap::new();
    for (&v, &c) in values.iter().zip(categories) {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts.entry(c).or_insert_with(|| vec![0; bins])[b] += 1;
    }
    Ok(HistogramReport {
        feature: feature.to_string(),
        edges,
        counts,
    })
}

pub fn histogram_feature(
    ds: &LabeledDataset,
    taxonomy: &AttackTaxonomy,
    feature: &str,
    bins: usize,
) -> Result<HistogramReport> {
    let j = feature_index(feature)?;
    let x = raw_matrix(ds);
    let cats = ds.categories(taxonomy)?;
    histogram(feature, &x.column(j).to_vec(), &cats, bins)
}

impl HistogramReport {
    /// `edge_low,edge_high` then one count column per category.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_low,edge_high");
        for c in Category::ALL {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for b in 0..self.edges.len() - 1 {
            let _ = write!(out, "{},{}", self.edges[b], self.edges[b + 1]);
            for c in Category::ALL {
                let n = self.counts.get(&c).map_or(0, |v| v[b]);
                let _ = write!(out, ",{n}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// `None` where a constant column makes the coefficient undefined.
    pub values: Vec<Vec<Option<f64>>>,
    pub constant: Vec<bool>,
}

fn is_constant(col: ndarray::ArrayView1<f64>) -> bool {
    col.iter().all(|&v| v == col[0])
}

/// Pearson coefficients over the columns of `x`. Each pair is computed
/// once and mirrored.
pub fn pearson_matrix(x: &Array2<f64>, names: &[String]) -> Result<CorrelationMatrix> {
    if x.nrows() < 2 {
        return Err(IdsError::InvalidInput("correlation needs at least two rows".into()));
    }
    if names.len() != x.ncols() {
        return Err(IdsError::Shape("one name per column required".into()));
    }
    let d = x.ncols();
    let constant: Vec<bool> = x.columns().into_iter().map(is_constant).collect();
    let centred: Vec<Vec<f64>> = x
        .columns()
        .into_iter()
        .map(|c| {
            let mean = c.sum() / c.len() as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centred
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let upper: Vec<Vec<Option<f64>>> = (0..d)
        .into_par_iter()
        .map(|i| {
            (i..d)
                .map(|j| {
                    if constant[i] || constant[j] {
                        None
                    } else if i == j {
                        Some(1.0)
                    } else {
                        let s: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                        Some((s / (norms[i] * norms[j])).clamp(-1.0, 1.0))
                    }
                })
                .collect()
        })
        .collect();
    let mut values = vec![vec![None; d]; d];
    for i in 0..d {
        for j in i..d {
            values[i][j] = upper[i][j - i];
            values[j][i] = upper[i][j - i];
        }
    }
    Ok(CorrelationMatrix {
        names: names.to_vec(),
        values,
        constant,
    })
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Header row of names; undefined cells are `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for n in &self.names {
            let _ = write!(out, ",{n}");
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                match v {
                    Some(r) => {
                        let _ = write!(out, ",{r}");
                    }
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn feature_names() -> Vec<String> {
    FEATURES.iter().map(|f| f.name.to_string()).collect()
}

/// `<x>,<y>,category` CSV with one row per record.
pub fn scatter_export(
    ds: &LabeledDataset,
    taxonomy: &AttackTaxonomy,
    feature_x: &str,
    feature_y: &str,
) -> Result<String> {
    let (ix, iy) = (feature_index(feature_x)?, feature_index(feature_y)?);
    let x = raw_matrix(ds);
    let cats = ds.categories(taxonomy)?;
    let mut out = format!("{feature_x},{feature_y},category\n");
    for (row, c) in x.rows().into_iter().zip(&cats) {
        let _ = writeln!(out, "{},{},{c}", row[ix], row[iy]);
    }
    Ok(out)
}

pub fn parse_scatter(text: &str) -> Result<Vec<(f64, f64, Category)>> {
    let bad = |n: usize| IdsError::Parse {
        path: "<scatter>".into(),
        line: n,
        message: "expected x,y,category".into(),
    };
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(n, line)| {
            let mut parts = line.split(',');
            let (Some(x), Some(y), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad(n + 1));
            };
            Ok((
                x.parse().map_err(|_| bad(n + 1))?,
                y.parse().map_err(|_| bad(n + 1))?,
                c.parse()?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFeature {
    pub index: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub rows: usize,
    pub constant_features: Vec<ConstantFeature>,
}

pub fn find_constant_features(x: &Array2<f64>, names: &[String]) -> Result<RedundancyReport> {
    if x.nrows() == 0 {
        return Err(IdsError::InvalidInput("no rows to inspect".into()));
    }
    let constant_features = x
        .columns()
        .into_iter()
        .enumerate()
        .filter(|(_, c)| is_constant(*c))
        .map(|(index, c)| ConstantFeature {
            index,
            name: names.get(index).cloned().unwrap_or_else(|| format!("f{index}")),
            value: c[0],
        })
        .collect();
    Ok(RedundancyReport {
        rows: x.nrows(),
        constant_features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreConfig {
    pub bins: usize,
    /// Histogram features; empty means all.
    pub histogram_features: Vec<String>,
    pub scatter_pairs: Vec<(String, String)>,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            bins: DEFAULT_BINS,
            histogram_features: Vec::new(),
            scatter_pairs: vec![
                ("rerror_rate".into(), "diff_srv_rate".into()),
                ("dst_host_rerror_rate".into(), "dst_host_diff_srv_rate".into()),
                ("count".into(), "serror_rate".into()),
            ],
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| IdsError::io(path, e))
}

/// Writes `histograms/<feature>.csv`, `correlation.csv`,
/// `scatter_<x>_<y>.csv` and `redundancy.json` under `out_dir`, and
/// returns the paths written.
pub fn write_report(
    ds: &LabeledDataset,
    taxonomy: &AttackTaxonomy,
    out_dir: &Path,
    cfg: &ExploreConfig,
) -> Result<Vec<PathBuf>> {
    let x = raw_matrix(ds);
    let cats = ds.categories(taxonomy)?;
    let names = feature_names();
    let selected: Vec<usize> = if cfg.histogram_features.is_empty() {
        (0..names.len()).collect()
    } else {
        cfg.histogram_features
            .iter()
            .map(|f| feature_index(f))
            .collect::<Result<_>>()?
    };
    for (a, b) in &cfg.scatter_pairs {
        feature_index(a)?;
        feature_index(b)?;
    }
    let hist_dir = out_dir.join("histograms");
    std::fs::create_dir_all(&hist_dir).map_err(|e| IdsError::io(&hist_dir, e))?;
    let mut written = Vec::new();
    for j in selected {
        let h = histogram(&names[j], &x.column(j).to_vec(), &cats, cfg.bins)?;
        let p = hist_dir.join(format!("{}.csv", names[j]));
        write(&p, &h.to_csv())?;
        written.push(p);
    }
    let p = out_dir.join("correlation.csv");
    write(&p, &pearson_matrix(&x, &names)?.to_csv())?;
    written.push(p);
    for (a, b) in &cfg.scatter_pairs {
        let p = out_dir.join(format!("scatter_{a}_{b}.csv"));
        write(&p, &scatter_export(ds, taxonomy, a, b)?)?;
        written.push(p);
    }
    let p = out_dir.join("redundancy.json");
    write(&p, &serde_json::to_string_pretty(&find_constant_features(&x, &names)?)?)?;
    written.push(p);
    Ok(written)
}
