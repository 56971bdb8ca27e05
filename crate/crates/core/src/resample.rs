//! SMOTE and SVM-SMOTE oversampling over standardized feature rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_linear_svm, LinearSvmConfig};
use crate::dataset::Category;
use crate::error::{IdsError, Result};
use crate::preprocess::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Desired rows per class; classes not listed are filled to the
    /// largest class count.
    pub target_counts: BTreeMap<Category, usize>,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target_counts: BTreeMap::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSmoteConfig {
    pub base: SmoteConfig,
    /// Neighbourhood size for the danger test.
    pub m_neighbors: usize,
    pub out_step: f64,
    pub svm: LinearSvmConfig,
}

impl Default for SvmSmoteConfig {
    fn default() -> Self {
        SvmSmoteConfig {
            base: SmoteConfig::default(),
            m_neighbors: 10,
            out_step: 0.5,
            svm: LinearSvmConfig::default(),
        }
    }
}

impl SvmSmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base.k_neighbors == 0 {
            return Err(IdsError::Config("k_neighbors must be >= 1".into()));
        }
        if self.m_neighbors < self.base.k_neighbors {
            return Err(IdsError::Config("m_neighbors must be >= k_neighbors".into()));
        }
        if !(self.out_step > 0.0 && self.out_step <= 1.0) {
            return Err(IdsError::Config(format!("out_step {} outside (0, 1]", self.out_step)));
        }
        Ok(())
    }
}

/// Indices of the `k` pool rows nearest to `query` (Euclidean), nearest
/// first; equal distances go to the lower index. `exclude` drops one pool
/// row, typically the query itself.
pub fn knn(query: ArrayView1<f64>, pool: ArrayView2<f64>, k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
    let available = pool.nrows() - exclude.map_or(0, |e| (e < pool.nrows()) as usize);
    if k == 0 || available < k {
        return Err(IdsError::InvalidInput(format!(
            "need {k} neighbours but the pool has {available} rows"
        )));
    }
    if query.len() != pool.ncols() {
        return Err(IdsError::Shape("query and pool widths differ".into()));
    }
    let mut dist: Vec<(f64, usize)> = pool
        .rows()
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(i, row)| {
            let d: f64 = row.iter().zip(query.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, cmp);
        dist.truncate(k);
    }
    dist.sort_by(cmp);
    Ok(dist.into_iter().map(|(_, i)| i).collect())
}

/// `a + lambda * (b - a)`.
pub fn interpolate(a: ArrayView1<f64>, b: ArrayView1<f64>, lambda: f64) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| x + lambda * (y - x)).collect()
}

/// `a + lambda * step * (a - b)`, moving away from `b`.
pub fn extrapolate(a: ArrayView1<f64>, b: ArrayView1<f64>, lambda: f64, step: f64) -> Vec<f64> {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x + lambda * step * (x - y))
        .collect()
}

/// Where a synthetic row came from; `seed` and `neighbor` index input rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub class: Category,
    pub seed: usize,
    pub neighbor: usize,
    pub lambda: f64,
    pub extrapolated: bool,
}

fn neighbour_table(x: ArrayView2<f64>, rows: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    rows.par_iter().map(|&r| knn(x.row(r), x, k, Some(r))).collect()
}

fn clamp_k(k: usize, n: usize) -> usize {
    k.min(n.saturating_sub(1))
}

/// Plain SMOTE: `n_new` rows interpolated between round-robin minority
/// seeds and one of their `k` nearest minority neighbours.
pub fn smote_generate(minority: &Array2<f64>, n_new: usize, cfg: &SmoteConfig) -> Result<Array2<f64>> {
    let mut rng = crate::rng_from_seed(cfg.seed);
    let seeds: Vec<usize> = (0..minority.nrows()).collect();
    let (rows, _) = smote_rows(minority.view(), &seeds, n_new, cfg.k_neighbors, &mut rng)?;
    Ok(rows)
}

/// Synthetic rows with (seed row, neighbour row, lambda) per row.
type SmoteRows = (Array2<f64>, Vec<(usize, usize, f64)>);

fn smote_rows(
    x: ArrayView2<f64>,
    seeds: &[usize],
    n_new: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<SmoteRows> {
    let mut out = Array2::zeros((n_new, x.ncols()));
    if n_new == 0 {
        return Ok((out, Vec::new()));
    }
    if k == 0 {
        return Err(IdsError::Config("k_neighbors must be >= 1".into()));
    }
    if x.nrows() < 2 {
        return Err(IdsError::InvalidInput(
            "SMOTE needs at least two minority rows to interpolate".into(),
        ));
    }
    let k = clamp_k(k, x.nrows());
    let table = neighbour_table(x, seeds, k)?;
    let mut origin = Vec::with_capacity(n_new);
    for i in 0..n_new {
        let s = i % seeds.len();
        let b = table[s][rng.random_range(0..k)];
        let lambda: f64 = rng.random();
        let row = interpolate(x.row(seeds[s]), x.row(b), lambda);
        out.row_mut(i).assign(&ArrayView1::from(&row));
        origin.push((seeds[s], b, lambda));
    }
    Ok((out, origin))
}

/// Per-class summary of an oversampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLog {
    pub class: Category,
    pub original: usize,
    pub synthetic: usize,
    pub seeds: usize,
    pub interpolated: usize,
    pub extrapolated: usize,
    /// No margin violators were found, so plain SMOTE over the class was used.
    pub fallback: bool,
}

/// Original rows first, then synthetic rows grouped by class.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledSet {
    pub matrix: FeatureMatrix,
    pub synthetic_mask: Vec<bool>,
    /// One entry per synthetic row, in row order.
    pub provenance: Vec<Provenance>,
    pub log: Vec<ClassLog>,
}

impl ResampledSet {
    pub fn n_synthetic(&self) -> usize {
        self.provenance.len()
    }

    /// 43-field text export: feature values, label (`synthetic:<class>`
    /// for generated rows), and a zero difficulty column.
    pub fn to_kdd_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.matrix.values().rows().into_iter().enumerate() {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let cat = self.matrix.categories()[i];
            if self.synthetic_mask[i] {
                let _ = writeln!(out, "synthetic:{cat},0");
            } else {
                let _ = writeln!(out, "{cat},0");
            }
        }
        out
    }

    pub fn write_kdd(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_kdd_text()).map_err(|e| IdsError::io(path, e))
    }
}

fn resolve_targets(counts: &BTreeMap<Category, usize>, cfg: &SmoteConfig) -> Result<BTreeMap<Category, usize>> {
    let max = counts.values().copied().max().unwrap_or(0);
    for c in cfg.target_counts.keys() {
        if !counts.contains_key(c) {
            return Err(IdsError::Config(format!("target count given for absent class {c}")));
        }
    }
    counts
        .iter()
        .map(|(&c, &n)| {
            let t = cfg.target_counts.get(&c).copied().unwrap_or(max);
            if t < n {
                return Err(IdsError::Config(format!("target {t} for {c} is below its {n} rows")));
            }
            Ok((c, t))
        })
        .collect()
}

struct ClassOutput {
    rows: Array2<f64>,
    provenance: Vec<Provenance>,
    log: ClassLog,
}

fn class_seed(seed: u64, class: Category) -> u64 {
    seed ^ (0xC1A5_5000 + class as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn oversample_class(
    x: ArrayView2<f64>,
    cats: &[Category],
    class: Category,
    n_new: usize,
    cfg: &SvmSmoteConfig,
) -> Result<ClassOutput> {
    let members: Vec<usize> = (0..cats.len()).filter(|&i| cats[i] == class).collect();
    let mut log = ClassLog {
        class,
        original: members.len(),
        synthetic: n_new,
        seeds: 0,
        interpolated: 0,
        extrapolated: 0,
        fallback: false,
    };
    if n_new == 0 {
        return Ok(ClassOutput {
            rows: Array2::zeros((0, x.ncols())),
            provenance: Vec::new(),
            log,
        });
    }
    if members.len() < 2 {
        return Err(IdsError::InvalidInput(format!(
            "class {class} has {} row(s); at least 2 are needed to oversample",
            members.len()
        )));
    }
    let mut rng = crate::rng_from_seed(class_seed(cfg.base.seed, class));
    let block = x.select(Axis(0), &members);

    let y: Vec<f64> = cats.iter().map(|&c| if c == class { 1.0 } else { -1.0 }).collect();
    let svm = fit_linear_svm(
        &x.to_owned(),
        &y,
        &LinearSvmConfig {
            seed: class_seed(cfg.svm.seed, class),
            ..cfg.svm
        },
    )?;
    // positions within `members` of the minority margin violators
    let seeds: Vec<usize> = svm
        .margin_violators
        .iter()
        .filter_map(|&r| members.binary_search(&r).ok())
        .collect();

    if seeds.is_empty() {
        log::info!("{class}: no margin violators, falling back to plain SMOTE");
        log.fallback = true;
        let all: Vec<usize> = (0..members.len()).collect();
        let (rows, origin) = smote_rows(block.view(), &all, n_new, cfg.base.k_neighbors, &mut rng)?;
        log.seeds = all.len();
        log.interpolated = n_new;
        let provenance = origin
            .into_iter()
            .map(|(a, b, lambda)| Provenance {
                class,
                seed: members[a],
                neighbor: members[b],
                lambda,
                extrapolated: false,
            })
            .collect();
        return Ok(ClassOutput { rows, provenance, log });
    }
    log.seeds = seeds.len();

    let m = clamp_k(cfg.m_neighbors, x.nrows());
    let danger: Vec<bool> = seeds
        .par_iter()
        .map(|&s| {
            let nn = knn(x.row(members[s]), x, m, Some(members[s]))?;
            let majority = nn.iter().filter(|&&j| cats[j] != class).count();
            Ok(2 * majority > m)
        })
        .collect::<Result<_>>()?;
    let k = clamp_k(cfg.base.k_neighbors, members.len());
    let table = neighbour_table(block.view(), &seeds, k)?;

    let mut rows = Array2::zeros((n_new, x.ncols()));
    let mut provenance = Vec::with_capacity(n_new);
    for i in 0..n_new {
        let s = i % seeds.len();
        let a = seeds[s];
        let b = table[s][rng.random_range(0..k)];
        let lambda: f64 = rng.random();
        let row = if danger[s] {
            log.interpolated += 1;
            interpolate(block.row(a), block.row(b), lambda)
        } else {
            log.extrapolated += 1;
            extrapolate(block.row(a), block.row(b), lambda, cfg.out_step)
        };
        rows.row_mut(i).assign(&ArrayView1::from(&row));
        provenance.push(Provenance {
            class,
            seed: members[a],
            neighbor: members[b],
            lambda,
            extrapolated: !danger[s],
        });
    }
    Ok(ClassOutput { rows, provenance, log })
}

/// SVM-SMOTE: fills every class up to its target count. Classes are
/// processed in parallel and assembled in category order.
pub fn svm_smote(matrix: &FeatureMatrix, cfg: &SvmSmoteConfig) -> Result<ResampledSet> {
    cfg.validate()?;
    let counts = crate::dataset::category_counts(matrix.categories());
    if counts.len() < 2 {
        return Err(IdsError::InvalidInput("SVM-SMOTE needs at least two classes".into()));
    }
    let targets = resolve_targets(&counts, &cfg.base)?;
    let x = matrix.values().view();
    let cats = matrix.categories();
    let outputs: Vec<ClassOutput> = targets
        .par_iter()
        .map(|(&class, &target)| oversample_class(x, cats, class, target - counts[&class], cfg))
        .collect::<Result<_>>()?;

    let n_syn: usize = outputs.iter().map(|o| o.rows.nrows()).sum();
    let mut views = vec![x];
    views.extend(outputs.iter().map(|o| o.rows.view()));
    let values = ndarray::concatenate(Axis(0), &views).map_err(|e| IdsError::Shape(e.to_string()))?;
    let mut categories = cats.to_vec();
    let mut provenance = Vec::with_capacity(n_syn);
    let mut log = Vec::new();
    for o in outputs {
        categories.extend(std::iter::repeat_n(o.log.class, o.rows.nrows()));
        provenance.extend(o.provenance);
        if o.log.synthetic > 0 {
            log::info!(
                "{}: {} original + {} synthetic ({} seeds, {} interpolated, {} extrapolated{})",
                o.log.class,
                o.log.original,
                o.log.synthetic,
                o.log.seeds,
                o.log.interpolated,
                o.log.extrapolated,
                if o.log.fallback { ", plain SMOTE fallback" } else { "" }
            );
        }
        log.push(o.log);
    }
    let mut synthetic_mask = vec![false; matrix.nrows()];
    synthetic_mask.resize(matrix.nrows() + n_syn, true);
    Ok(ResampledSet {
        matrix: FeatureMatrix::new(values, categories, matrix.split())?,
        synthetic_mask,
        provenance,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn knn_worked_example_and_ties() {
        let pool = array![[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]];
        assert_eq!(knn(array![0.4, 0.0].view(), pool.view(), 2, None).unwrap(), vec![0, 1]);
        assert_eq!(knn(array![5.0, 0.0].view(), pool.view(), 1, None).unwrap(), vec![2]);
        // (0.5, 0) is equidistant from rows 0 and 1
        assert_eq!(knn(array![0.5, 0.0].view(), pool.view(), 1, None).unwrap(), vec![0]);
        assert!(knn(array![0.0, 0.0].view(), pool.view(), 3, Some(0)).is_err());
    }

    #[test]
    fn knn_matches_exhaustive_oracle() {
        let mut rng = crate::rng_from_seed(3);
        let pool = Array2::from_shape_fn((60, 3), |_| rng.random_range(0..4) as f64);
        for q in 0..60 {
            let mut all: Vec<(f64, usize)> = (0..60)
                .filter(|&j| j != q)
                .map(|j| {
                    let d: f64 = (0..3).map(|c| (pool[[q, c]] - pool[[j, c]]).powi(2)).sum();
                    (d, j)
                })
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let want: Vec<usize> = all[..7].iter().map(|p| p.1).collect();
            assert_eq!(knn(pool.row(q), pool.view(), 7, Some(q)).unwrap(), want);
        }
    }

    #[test]
    fn interpolation_by_hand() {
        assert_eq!(
            interpolate(array![0.0, 0.0].view(), array![2.0, 2.0].view(), 0.5),
            vec![1.0, 1.0]
        );
        assert_eq!(
            extrapolate(array![1.0, 1.0].view(), array![0.0, 3.0].view(), 1.0, 0.5),
            vec![1.5, 0.0]
        );
    }

    #[test]
    fn smote_edge_cases() {
        let one = array![[1.0, 2.0]];
        assert_eq!(smote_generate(&one, 0, &SmoteConfig::default()).unwrap().nrows(), 0);
        assert!(smote_generate(&one, 1, &SmoteConfig::default()).is_err());
        let two = array![[0.0], [1.0]];
        let a = smote_generate(&two, 5, &SmoteConfig::default()).unwrap();
        assert_eq!(a, smote_generate(&two, 5, &SmoteConfig::default()).unwrap());
    }

    #[test]
    fn segment_property_over_1000_seeds() {
        let mut rng = crate::rng_from_seed(99);
        for seed in 0..1000u64 {
            let a: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let m = Array2::from_shape_vec((2, 4), [a.clone(), b.clone()].concat()).unwrap();
            let cfg = SmoteConfig {
                k_neighbors: 1,
                seed,
                ..SmoteConfig::default()
            };
            let syn = smote_generate(&m, 3, &cfg).unwrap();
            for row in syn.rows() {
                for i in 0..4 {
                    assert!(a[i].min(b[i]) <= row[i] && row[i] <= a[i].max(b[i]), "seed {seed}");
                }
            }
        }
    }

    fn blob_matrix(counts: &[(Category, usize)], seed: u64) -> FeatureMatrix {
        let mut rng = crate::rng_from_seed(seed);
        let mut vals = Vec::new();
        let mut cats = Vec::new();
        for &(c, n) in counts {
            let centre = c as usize as f64 * 2.0;
            for _ in 0..n {
                for _ in 0..3 {
                    vals.push(centre + rng.sample::<f64, _>(StandardNormal));
                }
                cats.push(c);
            }
        }
        FeatureMatrix::new(
            Array2::from_shape_vec((cats.len(), 3), vals).unwrap(),
            cats,
            Split::Train,
        )
        .unwrap()
    }

    #[test]
    fn hundred_to_ten_becomes_hundred_to_hundred() {
        let m = blob_matrix(&[(Category::DoS, 100), (Category::U2R, 10)], 1);
        let out = svm_smote(&m, &SvmSmoteConfig::default()).unwrap();
        let counts = crate::dataset::category_counts(out.matrix.categories());
        assert_eq!(counts[&Category::DoS], 100);
        assert_eq!(counts[&Category::U2R], 100);
        assert_eq!(out.n_synthetic(), 90);
        assert_eq!(out.synthetic_mask.iter().filter(|&&s| s).count(), 90);
        // originals first and unchanged
        assert_eq!(out.matrix.values().slice(ndarray::s![..110, ..]), m.values());
        assert!(out.synthetic_mask[..110].iter().all(|&s| !s));
        assert_eq!(out, svm_smote(&m, &SvmSmoteConfig::default()).unwrap());
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let m = blob_matrix(&[(Category::DoS, 20), (Category::Probe, 20)], 2);
        let out = svm_smote(&m, &SvmSmoteConfig::default()).unwrap();
        assert_eq!(out.matrix, m);
        assert!(out.synthetic_mask.iter().all(|&s| !s));
    }

    #[test]
    fn four_classes_fill_to_largest() {
        let m = blob_matrix(
            &[
                (Category::DoS, 80),
                (Category::Probe, 30),
                (Category::R2L, 8),
                (Category::U2R, 3),
            ],
            5,
        );
        let out = svm_smote(&m, &SvmSmoteConfig::default()).unwrap();
        let counts = crate::dataset::category_counts(out.matrix.categories());
        for c in Category::ATTACKS {
            assert_eq!(counts[&c], 80, "{c}");
        }
        assert_eq!(out.log.len(), 4);
    }

    #[test]
    fn explicit_targets_and_bad_targets() {
        let m = blob_matrix(&[(Category::DoS, 30), (Category::U2R, 5)], 4);
        let mut cfg = SvmSmoteConfig::default();
        cfg.base.target_counts.insert(Category::U2R, 12);
        cfg.base.target_counts.insert(Category::DoS, 30);
        let out = svm_smote(&m, &cfg).unwrap();
        assert_eq!(out.matrix.nrows(), 42);
        cfg.base.target_counts.insert(Category::U2R, 2);
        assert!(matches!(svm_smote(&m, &cfg), Err(IdsError::Config(_))));
    }

    #[test]
    fn interpolated_synthetics_stay_in_bounding_box() {
        let m = blob_matrix(&[(Category::DoS, 60), (Category::R2L, 15)], 8);
        let out = svm_smote(&m, &SvmSmoteConfig::default()).unwrap();
        let x = out.matrix.values();
        for (i, p) in out.provenance.iter().enumerate() {
            let row = x.row(m.nrows() + i);
            let (a, b) = (x.row(p.seed), x.row(p.neighbor));
            if p.extrapolated {
                let want = extrapolate(a, b, p.lambda, 0.5);
                assert_eq!(row.to_vec(), want);
            } else {
                for j in 0..3 {
                    assert!(a[j].min(b[j]) <= row[j] && row[j] <= a[j].max(b[j]));
                }
            }
        }
    }

    #[test]
    fn single_row_minority_is_an_error() {
        let m = blob_matrix(&[(Category::DoS, 10), (Category::U2R, 1)], 4);
        assert!(svm_smote(&m, &SvmSmoteConfig::default()).is_err());
    }

    #[test]
    fn export_labels_synthetics() {
        let m = blob_matrix(&[(Category::DoS, 6), (Category::U2R, 3)], 4);
        let out = svm_smote(&m, &SvmSmoteConfig::default()).unwrap();
        let text = out.to_kdd_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines[0].ends_with(",DoS,0"));
        assert!(lines[11].ends_with(",synthetic:U2R,0"));
        assert_eq!(lines[11].split(',').count(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn counts_hit_targets(seed in 0u64..500, small in 2usize..12, big in 12usize..40) {
            let m = blob_matrix(&[(Category::Probe, big), (Category::R2L, small)], seed);
            let mut cfg = SvmSmoteConfig::default();
            cfg.base.seed = seed;
            let out = svm_smote(&m, &cfg).unwrap();
            let counts = crate::dataset::category_counts(out.matrix.categories());
            prop_assert_eq!(counts[&Category::R2L], big);
            prop_assert_eq!(counts[&Category::Probe], big);
        }
    }
}
