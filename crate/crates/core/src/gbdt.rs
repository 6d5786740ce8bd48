//! Gradient-boosted decision trees for 4-class classification.
//!
//! Small, deterministic, dependency-free training: multiclass softmax
//! boosting with one depth-bounded regression tree per class per round,
//! exact greedy split search over sorted feature values (no histogram
//! binning), and Newton leaf values `sum(g) / (sum(h) + 1)` scaled by the
//! learning rate. Feature columns are presorted once and shared across all
//! trees; each tree level is built in a single pass over every column with
//! per-node accumulators, so training cost is `O(levels * rows * cols)` per
//! tree regardless of tree shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classes; fixed by the four-symbol dictionary.
pub const N_CLASSES: usize = 4;

/// L2 regularizer added to hessian sums in leaf values and split gains.
const HESSIAN_REG: f64 = 1.0;

/// Minimum split gain; splits of non-positive gain become leaves.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            rounds: 150,
            max_depth: 5,
            learning_rate: 0.1,
            min_leaf: 5,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// One node of a regression tree, arena-indexed; children always have larger
/// indices than their parent, so a well-formed arena is acyclic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree over feature vectors; the root is node 0. Routing rule:
/// `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Longest root-to-leaf path measured in splits.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural checks for deserialized trees: non-empty arena, child
    /// indices in range and strictly increasing (acyclic), feature indices
    /// below `n_features`, finite thresholds and leaf values.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::ModelInvalid("empty tree arena".into()));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::ModelInvalid(format!(
                            "non-finite leaf value at node {id}"
                        )));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature as usize >= n_features {
                        return Err(Error::ModelInvalid(format!(
                            "node {id} splits on feature {feature} >= {n_features}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::ModelInvalid(format!(
                            "non-finite threshold at node {id}"
                        )));
                    }
                    let (l, r) = (*left as usize, *right as usize);
                    if l <= id || r <= id || l >= self.nodes.len() || r >= self.nodes.len() {
                        return Err(Error::ModelInvalid(format!(
                            "node {id} has out-of-order children ({l}, {r})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A 4-class boosted classifier: per round, one tree per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Classifier {
    rounds: Vec<[Tree; N_CLASSES]>,
}

impl Classifier {
    pub fn rounds(&self) -> &[[Tree; N_CLASSES]] {
        &self.rounds
    }

    /// Accumulated per-class scores (pre-softmax margins).
    pub fn scores(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut s = [0.0; N_CLASSES];
        for round in &self.rounds {
            for (k, tree) in round.iter().enumerate() {
                s[k] += tree.predict(x);
            }
        }
        s
    }

    /// Argmax class; ties resolve to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let s = self.scores(x);
        let mut best = 0usize;
        for k in 1..N_CLASSES {
            if s[k] > s[best] {
                best = k;
            }
        }
        best as u8
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.rounds.is_empty() {
            return Err(Error::ModelInvalid("classifier with zero rounds".into()));
        }
        for round in &self.rounds {
            for tree in round {
                tree.validate(n_features)?;
            }
        }
        Ok(())
    }
}

/// Row-major feature storage.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "feature matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "feature ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(FeatureMatrix { data, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Feature columns presorted by (value, row index). Computed once per
/// training set and shared by every tree of every classifier trained on it.
pub struct Presorted {
    /// Per column: row indices in ascending value order.
    idx: Vec<Vec<u32>>,
    /// Per column: the values in the same order (sequential reads during
    /// split scans).
    val: Vec<Vec<f64>>,
}

impl Presorted {
    pub fn new(fm: &FeatureMatrix) -> Self {
        let mut idx = Vec::with_capacity(fm.cols());
        let mut val = Vec::with_capacity(fm.cols());
        for f in 0..fm.cols() {
            let mut order: Vec<u32> = (0..fm.rows() as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                fm.row(a as usize)[f]
                    .total_cmp(&fm.row(b as usize)[f])
                    .then(a.cmp(&b))
            });
            let values: Vec<f64> = order.iter().map(|&r| fm.row(r as usize)[f]).collect();
            idx.push(order);
            val.push(values);
        }
        Presorted { idx, val }
    }
}

const DEAD: u16 = u16::MAX;
const NO_SLOT: u16 = u16::MAX;

struct SlotAcc {
    g: f64,
    h: f64,
    count: usize,
    prev_val: f64,
    started: bool,
}

struct Candidate {
    gain: f64,
    feature: u32,
    threshold: f64,
}

struct ActiveLeaf {
    node: u16,
    g: f64,
    h: f64,
    count: usize,
    best: Option<Candidate>,
}

fn leaf_value(g: f64, h: f64, lr: f64) -> f64 {
    lr * (g / (h + HESSIAN_REG))
}

fn score(g: f64, h: f64) -> f64 {
    g * g / (h + HESSIAN_REG)
}

/// Fits one regression tree to per-row gradient pairs `gh[row] = [g, h]`
/// (g = negative gradient, i.e. the residual to move toward).
fn build_tree(
    fm: &FeatureMatrix,
    pre: &Presorted,
    gh: &[[f64; 2]],
    cfg: &TrainingConfig,
) -> Tree {
    let rows = fm.rows();
    debug_assert_eq!(gh.len(), rows);
    let total_g: f64 = gh.iter().map(|p| p[0]).sum();
    let total_h: f64 = gh.iter().map(|p| p[1]).sum();
    if rows < 2 * cfg.min_leaf {
        return Tree::leaf(leaf_value(total_g, total_h, cfg.learning_rate));
    }

    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let mut node_of_row: Vec<u16> = vec![0; rows];
    let mut active: Vec<ActiveLeaf> = vec![ActiveLeaf {
        node: 0,
        g: total_g,
        h: total_h,
        count: rows,
        best: None,
    }];

    for _level in 0..cfg.max_depth {
        if active.is_empty() {
            break;
        }
        // Map node id -> slot in `active` (dense; node ids stay small).
        let mut slot_of_node = vec![NO_SLOT; nodes.len()];
        for (slot, leaf) in active.iter().enumerate() {
            slot_of_node[leaf.node as usize] = slot as u16;
        }
        let mut accs: Vec<SlotAcc> = active
            .iter()
            .map(|_| SlotAcc {
                g: 0.0,
                h: 0.0,
                count: 0,
                prev_val: 0.0,
                started: false,
            })
            .collect();

        for f in 0..fm.cols() {
            for acc in &mut accs {
                acc.g = 0.0;
                acc.h = 0.0;
                acc.count = 0;
                acc.started = false;
            }
            let order = &pre.idx[f];
            let vals = &pre.val[f];
            for (pos, &row) in order.iter().enumerate() {
                let nid = node_of_row[row as usize];
                if nid == DEAD {
                    continue;
                }
                let slot = slot_of_node[nid as usize];
                let acc = &mut accs[slot as usize];
                let v = vals[pos];
                if acc.started && v > acc.prev_val {
                    let leaf = &mut active[slot as usize];
                    let n_right = leaf.count - acc.count;
                    if acc.count >= cfg.min_leaf && n_right >= cfg.min_leaf {
                        let gain = score(acc.g, acc.h) + score(leaf.g - acc.g, leaf.h - acc.h)
                            - score(leaf.g, leaf.h);
                        let better = match &leaf.best {
                            None => gain > GAIN_EPS,
                            Some(c) => gain > c.gain,
                        };
                        if better {
                            // Split halfway between adjacent distinct values,
                            // clamped so `<= threshold` keeps the left block
                            // exactly when rounding collapses the midpoint.
                            let mut thr = acc.prev_val + (v - acc.prev_val) / 2.0;
                            if thr >= v {
                                thr = acc.prev_val;
                            }
                            leaf.best = Some(Candidate {
                                gain,
                                feature: f as u32,
                                threshold: thr,
                            });
                        }
                    }
                }
                let pair = gh[row as usize];
                acc.g += pair[0];
                acc.h += pair[1];
                acc.count += 1;
                acc.prev_val = v;
                acc.started = true;
            }
        }

        // Materialize the level: split leaves that found a candidate,
        // finalize the rest.
        struct SplitPlan {
            node: u16,
            feature: u32,
            threshold: f64,
            left: u16,
            right: u16,
        }
        let mut plans: Vec<SplitPlan> = Vec::new();
        let mut next_active: Vec<ActiveLeaf> = Vec::new();
        for leaf in &mut active {
            match leaf.best.take() {
                Some(c) => {
                    let left = nodes.len() as u16;
                    let right = left + 1;
                    nodes[leaf.node as usize] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: left as u32,
                        right: right as u32,
                    };
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    plans.push(SplitPlan {
                        node: leaf.node,
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                    });
                    next_active.push(ActiveLeaf {
                        node: left,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                        best: None,
                    });
                    next_active.push(ActiveLeaf {
                        node: right,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                        best: None,
                    });
                }
                None => {
                    nodes[leaf.node as usize] = Node::Leaf {
                        value: leaf_value(leaf.g, leaf.h, cfg.learning_rate),
                    };
                }
            }
        }
        if plans.is_empty() {
            active.clear();
            break;
        }
        let mut plan_of_node = vec![NO_SLOT; nodes.len()];
        for (i, p) in plans.iter().enumerate() {
            plan_of_node[p.node as usize] = i as u16;
        }
        let mut slot_of_child = vec![NO_SLOT; nodes.len()];
        for (slot, leaf) in next_active.iter().enumerate() {
            slot_of_child[leaf.node as usize] = slot as u16;
        }
        for row in 0..rows {
            let nid = node_of_row[row];
            if nid == DEAD {
                continue;
            }
            let pi = plan_of_node[nid as usize];
            if pi == NO_SLOT {
                node_of_row[row] = DEAD;
                continue;
            }
            let plan = &plans[pi as usize];
            let child = if fm.row(row)[plan.feature as usize] <= plan.threshold {
                plan.left
            } else {
                plan.right
            };
            node_of_row[row] = child;
            let leaf = &mut next_active[slot_of_child[child as usize] as usize];
            leaf.g += gh[row][0];
            leaf.h += gh[row][1];
            leaf.count += 1;
        }
        active = next_active;
    }

    // Depth budget exhausted: whatever is still active becomes a leaf.
    for leaf in &active {
        nodes[leaf.node as usize] = Node::Leaf {
            value: leaf_value(leaf.g, leaf.h, cfg.learning_rate),
        };
    }
    Tree { nodes }
}

fn softmax_into(scores: &[f64; N_CLASSES], out: &mut [f64; N_CLASSES]) {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for k in 0..N_CLASSES {
        let e = (scores[k] - m).exp();
        out[k] = e;
        sum += e;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}

/// Trains a 4-class classifier with multiclass softmax boosting.
///
/// Deterministic in (features, labels, config): no sampling, no threading
/// inside one classifier, fixed scan orders throughout.
pub fn fit_classifier(
    fm: &FeatureMatrix,
    pre: &Presorted,
    labels: &[u8],
    cfg: &TrainingConfig,
) -> Result<Classifier> {
    cfg.validate()?;
    let rows = fm.rows();
    if rows == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if labels.len() != rows {
        return Err(Error::Dimension(format!(
            "{} labels for {} rows",
            labels.len(),
            rows
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= N_CLASSES) {
        return Err(Error::InvalidArgument(format!("label {bad} out of range")));
    }

    let mut scores = vec![[0.0f64; N_CLASSES]; rows];
    let mut probs = [0.0f64; N_CLASSES];
    let mut gh_class: Vec<Vec<[f64; 2]>> = (0..N_CLASSES).map(|_| vec![[0.0; 2]; rows]).collect();

    let mut rounds: Vec<[Tree; N_CLASSES]> = Vec::with_capacity(cfg.rounds);
    for _round in 0..cfg.rounds {
        // Gradients for every class from the scores at round start.
        for row in 0..rows {
            softmax_into(&scores[row], &mut probs);
            let y = labels[row] as usize;
            for k in 0..N_CLASSES {
                let target = if y == k { 1.0 } else { 0.0 };
                gh_class[k][row] = [target - probs[k], probs[k] * (1.0 - probs[k])];
            }
        }
        let round_trees: [Tree; N_CLASSES] = std::array::from_fn(|k| {
            build_tree(fm, pre, &gh_class[k], cfg)
        });
        for row in 0..rows {
            let x = fm.row(row);
            for k in 0..N_CLASSES {
                scores[row][k] += round_trees[k].predict(x);
            }
        }
        rounds.push(round_trees);
    }
    Ok(Classifier { rounds })
}
