//! Exact greedy CART builder. Rows are presorted once per feature; each
//! depth level is grown with one sweep per feature over that order, so a
//! level costs O(features x rows) regardless of how many nodes it holds.

use ndarray::{Array2, ArrayView1};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per node (`None` = all).
    pub max_features: Option<usize>,
}

impl Default for DecisionTreeConfig {
    fn default() -> Self {
        DecisionTreeConfig {
            max_depth: 12,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

impl DecisionTreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(IdsError::Config("max_depth must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(IdsError::Config("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Class weights (classification) or a single value (regression).
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node arena; node 0 is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf(&self, row: ArrayView1<f64>) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf(v) => return v,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_class(&self, row: ArrayView1<f64>) -> usize {
        crate::nn::argmax(self.leaf(row))
    }

    pub fn predict_value(&self, row: ArrayView1<f64>) -> f64 {
        self.leaf(row)[0]
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn to_nested(&self) -> NestedNode {
        fn go(nodes: &[TreeNode], i: usize) -> NestedNode {
            match &nodes[i] {
                TreeNode::Leaf(v) => NestedNode::Leaf { leaf: v.clone() },
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => NestedNode::Split {
                    feature: *feature,
                    threshold: *threshold,
                    left: Box::new(go(nodes, *left)),
                    right: Box::new(go(nodes, *right)),
                },
            }
        }
        go(&self.nodes, 0)
    }

    pub fn from_nested(root: &NestedNode) -> Self {
        fn go(n: &NestedNode, out: &mut Vec<TreeNode>) -> usize {
            let id = out.len();
            match n {
                NestedNode::Leaf { leaf } => out.push(TreeNode::Leaf(leaf.clone())),
                NestedNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(TreeNode::Leaf(Vec::new()));
                    let l = go(left, out);
                    let r = go(right, out);
                    out[id] = TreeNode::Split {
                        feature: *feature,
                        threshold: *threshold,
                        left: l,
                        right: r,
                    };
                }
            }
            id
        }
        let mut nodes = Vec::new();
        go(root, &mut nodes);
        DecisionTree { nodes }
    }
}

/// Serialized tree: nested node objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NestedNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<NestedNode>,
        right: Box<NestedNode>,
    },
    Leaf {
        leaf: Vec<f64>,
    },
}

impl Serialize for DecisionTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_nested().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(DecisionTree::from_nested(&NestedNode::deserialize(d)?))
    }
}

/// Gini impurity of a weighted class histogram.
pub fn gini(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// What the tree is fitted to.
pub enum Target<'a> {
    /// Class indices in 0..k, split by weighted Gini.
    Classes { labels: &'a [usize], k: usize },
    /// Gradient/hessian pairs; splits maximize G_l^2/W_l + G_r^2/W_r and
    /// leaves hold sum(w g) / sum(w h).
    Newton { grad: &'a [f64], hess: &'a [f64] },
}

impl Target<'_> {
    fn stat_len(&self) -> usize {
        match self {
            Target::Classes { k, .. } => *k,
            // [sum w*g, sum w*h]
            Target::Newton { .. } => 2,
        }
    }

    fn accumulate(&self, stats: &mut [f64], row: usize, w: f64) {
        match self {
            Target::Classes { labels, .. } => stats[labels[row]] += w,
            Target::Newton { grad, hess } => {
                stats[0] += w * grad[row];
                stats[1] += w * hess[row];
            }
        }
    }

    /// Lower is better.
    fn score(&self, stats: &[f64], weight: f64) -> f64 {
        match self {
            Target::Classes { .. } => weight * gini(stats),
            Target::Newton { .. } => {
                if weight <= 0.0 {
                    0.0
                } else {
                    -(stats[0] * stats[0]) / weight
                }
            }
        }
    }

    fn leaf(&self, stats: &[f64]) -> Vec<f64> {
        match self {
            Target::Classes { .. } => stats.to_vec(),
            Target::Newton { .. } => vec![stats[0] / stats[1].max(1e-12)],
        }
    }

    fn is_pure(&self, stats: &[f64]) -> bool {
        match self {
            Target::Classes { .. } => stats.iter().filter(|&&c| c > 0.0).count() <= 1,
            Target::Newton { .. } => false,
        }
    }
}

/// Feature matrix with per-feature row orders computed once and reused
/// across many tree fits (boosting rounds, forest members).
pub struct TreeBuilder<'a> {
    x: &'a Array2<f64>,
    sorted: Vec<Vec<u32>>,
}

const NO_NODE: u32 = u32::MAX;

struct Pending {
    node: usize,
    depth: usize,
    stats: Vec<f64>,
    weight: f64,
    features: Option<Vec<bool>>,
}

#[derive(Clone)]
struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
    left_stats: Vec<f64>,
    left_weight: f64,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(x: &'a Array2<f64>) -> Self {
        let n = x.nrows();
        let sorted = (0..x.ncols())
            .map(|f| {
                let col = x.column(f);
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        TreeBuilder { x, sorted }
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    /// Grows one tree. `weights` (one per row, >= 0) act as sample
    /// multiplicities; zero-weight rows are ignored.
    pub fn fit(
        &self,
        target: &Target<'_>,
        weights: &[f64],
        cfg: &DecisionTreeConfig,
        rng: &mut impl Rng,
    ) -> Result<DecisionTree> {
        cfg.validate()?;
        let n = self.x.nrows();
        let n_features = self.x.ncols();
        if n == 0 {
            return Err(IdsError::InvalidInput("cannot fit a tree on zero rows".into()));
        }
        if weights.len() != n {
            return Err(IdsError::Shape("one weight per row required".into()));
        }
        if let Target::Classes { labels, k } = target {
            if labels.len() != n || labels.iter().any(|&l| l >= *k) {
                return Err(IdsError::InvalidInput(
                    "class labels must be in 0..k, one per row".into(),
                ));
            }
        }
        let stat_len = target.stat_len();
        let mut node_of: Vec<u32> = vec![0; n];
        let mut root_stats = vec![0.0; stat_len];
        let mut root_weight = 0.0;
        for r in 0..n {
            if weights[r] > 0.0 {
                target.accumulate(&mut root_stats, r, weights[r]);
                root_weight += weights[r];
            } else {
                node_of[r] = NO_NODE;
            }
        }
        if root_weight <= 0.0 {
            return Err(IdsError::InvalidInput("all sample weights are zero".into()));
        }
        let subset = |rng: &mut dyn rand::RngCore| -> Option<Vec<bool>> {
            cfg.max_features.filter(|&m| m < n_features).map(|m| {
                let mut mask = vec![false; n_features];
                for f in sample(rng, n_features, m) {
                    mask[f] = true;
                }
                mask
            })
        };

        let mut nodes = vec![TreeNode::Leaf(Vec::new())];
        let mut level = vec![Pending {
            node: 0,
            depth: 0,
            stats: root_stats,
            weight: root_weight,
            features: subset(rng),
        }];

        while !level.is_empty() {
            // slot of each node in this level, or NO_NODE if not splittable
            let mut slot_of_node = vec![NO_NODE; nodes.len()];
            let mut splittable = Vec::new();
            for (s, p) in level.iter().enumerate() {
                let can_split =
                    p.depth < cfg.max_depth && p.weight >= cfg.min_samples_split as f64 && !target.is_pure(&p.stats);
                if can_split {
                    slot_of_node[p.node] = splittable.len() as u32;
                    splittable.push(s);
                } else {
                    nodes[p.node] = TreeNode::Leaf(target.leaf(&p.stats));
                }
            }
            if splittable.is_empty() {
                break;
            }
            let m = splittable.len();
            let mut best: Vec<Option<Best>> = vec![None; m];
            let parent_score: Vec<f64> = splittable
                .iter()
                .map(|&s| target.score(&level[s].stats, level[s].weight))
                .collect();

            let mut left = vec![0.0; m * stat_len];
            let mut left_w = vec![0.0; m];
            let mut last = vec![f64::NAN; m];
            let mut right = vec![0.0; stat_len];
            for f in 0..n_features {
                let uses = |slot: usize| level[splittable[slot]].features.as_ref().is_none_or(|mask| mask[f]);
                if !(0..m).any(uses) {
                    continue;
                }
                let considered: Vec<bool> = (0..m).map(uses).collect();
                left.fill(0.0);
                left_w.fill(0.0);
                last.fill(f64::NAN);
                let col = self.x.column(f);
                for &r in &self.sorted[f] {
                    let r = r as usize;
                    let node = node_of[r];
                    if node == NO_NODE {
                        continue;
                    }
                    let slot = slot_of_node[node as usize];
                    if slot == NO_NODE || !considered[slot as usize] {
                        continue;
                    }
                    let slot = slot as usize;
                    let v = col[r];
                    if left_w[slot] > 0.0 && v > last[slot] {
                        let p = &level[splittable[slot]];
                        let ls = &left[slot * stat_len..(slot + 1) * stat_len];
                        for j in 0..stat_len {
                            right[j] = p.stats[j] - ls[j];
                        }
                        let rw = p.weight - left_w[slot];
                        let score = target.score(ls, left_w[slot]) + target.score(&right, rw);
                        let better = match &best[slot] {
                            None => score < parent_score[slot] - 1e-12,
                            Some(b) => score < b.score,
                        };
                        if better {
                            let mut threshold = 0.5 * (last[slot] + v);
                            if threshold >= v {
                                threshold = last[slot];
                            }
                            best[slot] = Some(Best {
                                score,
                                feature: f,
                                threshold,
                                left_stats: ls.to_vec(),
                                left_weight: left_w[slot],
                            });
                        }
                    }
                    target.accumulate(&mut left[slot * stat_len..(slot + 1) * stat_len], r, weights[r]);
                    left_w[slot] += weights[r];
                    last[slot] = v;
                }
            }

            // materialize children
            let mut next = Vec::new();
            let mut split_of_node: Vec<Option<(usize, f64, u32, u32)>> = vec![None; nodes.len()];
            for (slot, &s) in splittable.iter().enumerate() {
                let p = &level[s];
                match best[slot].take() {
                    None => nodes[p.node] = TreeNode::Leaf(target.leaf(&p.stats)),
                    Some(b) => {
                        let l = nodes.len();
                        let r = l + 1;
                        nodes.push(TreeNode::Leaf(Vec::new()));
                        nodes.push(TreeNode::Leaf(Vec::new()));
                        nodes[p.node] = TreeNode::Split {
                            feature: b.feature,
                            threshold: b.threshold,
                            left: l,
                            right: r,
                        };
                        split_of_node[p.node] = Some((b.feature, b.threshold, l as u32, r as u32));
                        let right_stats: Vec<f64> = p.stats.iter().zip(&b.left_stats).map(|(t, l)| t - l).collect();
                        next.push(Pending {
                            node: l,
                            depth: p.depth + 1,
                            stats: b.left_stats,
                            weight: b.left_weight,
                            features: subset(rng),
                        });
                        next.push(Pending {
                            node: r,
                            depth: p.depth + 1,
                            stats: right_stats,
                            weight: p.weight - b.left_weight,
                            features: subset(rng),
                        });
                    }
                }
            }
            for (r, slot) in node_of.iter_mut().enumerate() {
                let node = *slot;
                if node == NO_NODE {
                    continue;
                }
                *slot = match split_of_node.get(node as usize).copied().flatten() {
                    Some((f, t, l, rt)) => {
                        if self.x[[r, f]] <= t {
                            l
                        } else {
                            rt
                        }
                    }
                    None => NO_NODE,
                };
            }
            level = next;
        }
        // renumber depth-first so the arena matches its nested form
        Ok(DecisionTree::from_nested(&DecisionTree { nodes }.to_nested()))
    }
}

/// Unweighted classification tree on class indices 0..k.
pub fn fit_tree(x: &Array2<f64>, labels: &[usize], k: usize, cfg: &DecisionTreeConfig) -> Result<DecisionTree> {
    let builder = TreeBuilder::new(x);
    let weights = vec![1.0; x.nrows()];
    builder.fit(
        &Target::Classes { labels, k },
        &weights,
        cfg,
        &mut crate::rng_from_seed(0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand_distr::StandardNormal;

    #[test]
    fn gini_half_half() {
        assert_abs_diff_eq!(gini(&[5.0, 5.0]), 0.5);
        assert_eq!(gini(&[3.0, 0.0]), 0.0);
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let t = fit_tree(&x, &[1, 1, 1], 2, &DecisionTreeConfig::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_class(array![10.0].view()), 1);
    }

    #[test]
    fn one_dimensional_split_at_midpoint() {
        let x = array![[0.0], [1.0]];
        let t = fit_tree(&x, &[0, 1], 2, &DecisionTreeConfig::default()).unwrap();
        match &t.nodes()[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.predict_class(array![0.0].view()), 0);
        assert_eq!(t.predict_class(array![1.0].view()), 1);
    }

    /// Exhaustive oracle: best (feature, threshold) by weighted Gini over
    /// all midpoints, first found wins.
    fn exhaustive_best_split(x: &Array2<f64>, y: &[usize], k: usize) -> Option<(usize, f64)> {
        let n = x.nrows();
        let mut parent = vec![0.0; k];
        for &c in y {
            parent[c] += 1.0;
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x.ncols() {
            let mut vals: Vec<f64> = x.column(f).to_vec();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = 0.5 * (w[0] + w[1]);
                let mut l = vec![0.0; k];
                let mut r = vec![0.0; k];
                for i in 0..n {
                    if x[[i, f]] <= t {
                        l[y[i]] += 1.0
                    } else {
                        r[y[i]] += 1.0
                    }
                }
                let s = l.iter().sum::<f64>() * gini(&l) + r.iter().sum::<f64>() * gini(&r);
                if s < n as f64 * gini(&parent) - 1e-12 && best.is_none_or(|b| s < b.0) {
                    best = Some((s, f, t));
                }
            }
        }
        best.map(|b| (b.1, b.2))
    }

    #[test]
    fn root_split_matches_exhaustive_oracle() {
        let mut rng = crate::rng_from_seed(5);
        for _ in 0..30 {
            let n = 25;
            let x = Array2::from_shape_simple_fn((n, 3), || (rng.random_range(0..6) as f64) * 0.5);
            let y: Vec<usize> = (0..n)
                .map(|i| ((x[[i, 1]] + x[[i, 2]]) > 2.0) as usize ^ (i % 7 == 0) as usize)
                .collect();
            let cfg = DecisionTreeConfig {
                max_depth: 1,
                ..Default::default()
            };
            let t = fit_tree(&x, &y, 2, &cfg).unwrap();
            match (exhaustive_best_split(&x, &y, 2), &t.nodes()[0]) {
                (None, TreeNode::Leaf(_)) => {}
                (Some((f, th)), TreeNode::Split { feature, threshold, .. }) => {
                    assert_eq!((f, th), (*feature, *threshold));
                }
                (o, n) => panic!("oracle {o:?} vs tree {n:?}"),
            }
        }
    }

    /// Replays root-to-leaf comparisons on the nested serialized form.
    fn replay(node: &NestedNode, row: &[f64]) -> Vec<f64> {
        match node {
            NestedNode::Leaf { leaf } => leaf.clone(),
            NestedNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    replay(left, row)
                } else {
                    replay(right, row)
                }
            }
        }
    }

    #[test]
    fn prediction_equals_path_replay_on_random_inputs() {
        let mut rng = crate::rng_from_seed(9);
        let x = Array2::from_shape_simple_fn((300, 4), || rng.sample::<f64, _>(StandardNormal));
        let y: Vec<usize> = (0..300)
            .map(|i| {
                if x[[i, 0]] * x[[i, 1]] > 0.1 {
                    2
                } else if x[[i, 2]] > 0.5 {
                    1
                } else {
                    0
                }
            })
            .collect();
        let t = fit_tree(&x, &y, 3, &DecisionTreeConfig::default()).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let nested: NestedNode = serde_json::from_str(&json).unwrap();
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        for _ in 0..500 {
            let row: Vec<f64> = (0..4).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let view = ndarray::ArrayView1::from(&row);
            assert_eq!(t.leaf(view), replay(&nested, &row).as_slice());
        }
        // deep enough to fit the training data well
        let acc = (0..300).filter(|&i| t.predict_class(x.row(i)) == y[i]).count();
        assert!(acc >= 290, "{acc}");
    }

    #[test]
    fn depth_limit_is_respected() {
        let mut rng = crate::rng_from_seed(1);
        let x = Array2::from_shape_simple_fn((200, 2), || rng.sample::<f64, _>(StandardNormal));
        let y: Vec<usize> = (0..200).map(|i| (i * 7919 % 3) % 2).collect();
        let cfg = DecisionTreeConfig {
            max_depth: 3,
            ..Default::default()
        };
        assert!(fit_tree(&x, &y, 2, &cfg).unwrap().depth() <= 3);
    }

    #[test]
    fn newton_target_leaf_values() {
        // grad = residual, hess = 1 gives mean residual per leaf
        let x = array![[0.0], [0.0], [1.0], [1.0]];
        let g = [1.0, 3.0, -2.0, -4.0];
        let h = [1.0; 4];
        let b = TreeBuilder::new(&x);
        let t = b
            .fit(
                &Target::Newton { grad: &g, hess: &h },
                &[1.0; 4],
                &DecisionTreeConfig::default(),
                &mut crate::rng_from_seed(0),
            )
            .unwrap();
        assert_eq!(t.predict_value(array![0.0].view()), 2.0);
        assert_eq!(t.predict_value(array![1.0].view()), -3.0);
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let x = array![[0.0], [1.0], [2.0]];
        let b = TreeBuilder::new(&x);
        let t = b
            .fit(
                &Target::Classes {
                    labels: &[0, 1, 1],
                    k: 2,
                },
                &[1.0, 0.0, 0.0],
                &DecisionTreeConfig::default(),
                &mut crate::rng_from_seed(0),
            )
            .unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_class(array![2.0].view()), 0);
    }
}
