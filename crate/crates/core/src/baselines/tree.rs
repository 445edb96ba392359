//! CART regression trees grown by greedy variance reduction.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::learner::{Learner, Regressor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 4, min_leaf: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64, count: usize },
    /// `x[dim] <= threshold` goes left.
    Split { dim: usize, threshold: f64, left: usize, right: usize },
}

/// Binary tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub params: TreeParams,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Leaf { value, count } => Some((value, count)),
            Node::Split { .. } => None,
        })
    }
}

impl Regressor for RegressionTree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split { dim, threshold, left, right } => {
                    i = if x[dim] <= threshold { left } else { right };
                }
            }
        }
    }
}

struct Split {
    dim: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

/// Best variance-reducing split of `idx`. Candidate thresholds are midpoints
/// between adjacent distinct sorted values; ties keep the first candidate in
/// (dim, threshold) order.
fn best_split(data: &LabeledSet, idx: &[usize], min_leaf: usize) -> Option<Split> {
    let n = idx.len();
    let mean = idx.iter().map(|&i| data.target(i)).sum::<f64>() / n as f64;
    let mut best: Option<(usize, f64, f64, usize)> = None;
    let mut order = idx.to_vec();
    for dim in 0..data.dims() {
        order.sort_by(|&a, &b| data.input(a)[dim].total_cmp(&data.input(b)[dim]).then(a.cmp(&b)));
        // Centered sums keep constant labels at exactly zero gain.
        let total: f64 = order.iter().map(|&i| data.target(i) - mean).sum();
        let total_sq: f64 = order.iter().map(|&i| (data.target(i) - mean) * (data.target(i) - mean)).sum();
        let parent = total_sq - total * total / n as f64;
        let (mut s, mut sq) = (0.0, 0.0);
        for pos in 0..n - 1 {
            let r = data.target(order[pos]) - mean;
            s += r;
            sq += r * r;
            let nl = pos + 1;
            let nr = n - nl;
            let (xa, xb) = (data.input(order[pos])[dim], data.input(order[pos + 1])[dim]);
            if nl < min_leaf || nr < min_leaf || !(xa < xb) {
                continue;
            }
            let left = sq - s * s / nl as f64;
            let rs = total - s;
            let right = (total_sq - sq) - rs * rs / nr as f64;
            let gain = parent - left - right;
            if gain > 0.0 && best.is_none_or(|b| gain > b.2) {
                best = Some((dim, 0.5 * (xa + xb), gain, nl));
            }
        }
    }
    let (dim, threshold, gain, _) = best?;
    let (left, right): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data.input(i)[dim] <= threshold);
    Some(Split { dim, threshold, gain, left, right })
}

fn grow(data: &LabeledSet, idx: Vec<usize>, depth: usize, params: &TreeParams, nodes: &mut Vec<Node>) -> usize {
    let at = nodes.len();
    let mean = idx.iter().map(|&i| data.target(i)).sum::<f64>() / idx.len() as f64;
    nodes.push(Node::Leaf { value: mean, count: idx.len() });
    if depth >= params.max_depth || idx.len() < 2 * params.min_leaf.max(1) {
        return at;
    }
    if let Some(split) = best_split(data, &idx, params.min_leaf.max(1)) {
        debug_assert!(split.gain > 0.0);
        let left = grow(data, split.left, depth + 1, params, nodes);
        let right = grow(data, split.right, depth + 1, params, nodes);
        nodes[at] = Node::Split { dim: split.dim, threshold: split.threshold, left, right };
    }
    at
}

/// Greedy CART fit; leaves predict the mean of their examples.
pub fn tree_fit(data: &LabeledSet, max_depth: usize, min_leaf: usize) -> Result<RegressionTree> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let params = TreeParams { max_depth, min_leaf };
    let mut nodes = Vec::new();
    grow(data, (0..data.len()).collect(), 0, &params, &mut nodes);
    Ok(RegressionTree { nodes, params })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeLearner {
    pub params: TreeParams,
}

impl Learner for TreeLearner {
    type Model = RegressionTree;

    fn fit(&self, data: &LabeledSet) -> Result<RegressionTree> {
        tree_fit(data, self.params.max_depth, self.params.min_leaf)
    }

    fn min_examples(&self, _dims: usize) -> usize {
        self.params.min_leaf.max(1)
    }
}
