//! Binary CART trees: Gini classification trees and squared-error regression
//! trees with caller-supplied leaf values.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    /// Total weighted impurity decrease per feature.
    pub gains: Vec<f64>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

/// What each sample contributes to the split criterion.
pub(crate) enum Criterion<'a> {
    /// Binary labels, Gini impurity; leaves hold the positive fraction.
    Gini(&'a [bool]),
    /// Squared error on `targets`; leaves hold `leaf(indices)`.
    SquaredError {
        targets: &'a [f64],
        leaf: &'a dyn Fn(&[usize]) -> f64,
    },
}

impl Criterion<'_> {
    fn value(&self, i: usize) -> f64 {
        match self {
            Criterion::Gini(y) => y[i] as u8 as f64,
            Criterion::SquaredError { targets, .. } => targets[i],
        }
    }

    /// Impurity times sample count, from count, sum, and sum of squares.
    fn weighted_impurity(&self, n: f64, s: f64, ss: f64) -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        match self {
            // n·(1 - p² - (1-p)²) = 2·s·(n-s)/n for 0/1 values
            Criterion::Gini(_) => 2.0 * s * (n - s) / n,
            Criterion::SquaredError { .. } => (ss - s * s / n).max(0.0),
        }
    }

    fn leaf_value(&self, idx: &[usize]) -> f64 {
        match self {
            Criterion::Gini(y) => idx.iter().filter(|&&i| y[i]).count() as f64 / idx.len() as f64,
            Criterion::SquaredError { leaf, .. } => leaf(idx),
        }
    }
}

/// Feature subsampling at each split.
pub(crate) enum FeatureSampling<'r, R: Rng> {
    All,
    Random { k: usize, rng: &'r mut R },
}

pub(crate) fn grow<R: Rng>(
    x: &DenseMatrix,
    samples: &[usize],
    criterion: &Criterion<'_>,
    params: &TreeParams,
    mut features: FeatureSampling<'_, R>,
) -> Tree {
    let mut tree = Tree {
        nodes: Vec::new(),
        gains: vec![0.0; x.cols()],
    };
    grow_node(x, samples.to_vec(), 0, criterion, params, &mut features, &mut tree);
    tree
}

fn grow_node<R: Rng>(
    x: &DenseMatrix,
    idx: Vec<usize>,
    depth: usize,
    criterion: &Criterion<'_>,
    params: &TreeParams,
    features: &mut FeatureSampling<'_, R>,
    tree: &mut Tree,
) -> usize {
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode::Leaf {
        value: criterion.leaf_value(&idx),
        samples: idx.len(),
    });

    let n = idx.len() as f64;
    let (s, ss) = idx.iter().fold((0.0, 0.0), |(s, ss), &i| {
        let v = criterion.value(i);
        (s + v, ss + v * v)
    });
    let parent = criterion.weighted_impurity(n, s, ss);
    let depth_ok = params.max_depth.is_none_or(|d| depth < d);
    if !depth_ok || idx.len() < params.min_samples_split.max(2) || parent <= 1e-12 {
        return id;
    }

    let candidates: Vec<usize> = match features {
        FeatureSampling::All => (0..x.cols()).collect(),
        FeatureSampling::Random { k, rng } => {
            if *k >= x.cols() {
                (0..x.cols()).collect()
            } else {
                sample(&mut **rng, x.cols(), *k).into_vec()
            }
        }
    };

    let min_leaf = params.min_samples_leaf.max(1);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.clone();
    for &f in &candidates {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        let (mut ls, mut lss) = (0.0, 0.0);
        for pos in 0..order.len() - 1 {
            let v = criterion.value(order[pos]);
            ls += v;
            lss += v * v;
            let nl = pos + 1;
            let (a, b) = (x.get(order[pos], f), x.get(order[pos + 1], f));
            if a == b || nl < min_leaf || order.len() - nl < min_leaf {
                continue;
            }
            let nl = nl as f64;
            let gain = parent
                - criterion.weighted_impurity(nl, ls, lss)
                - criterion.weighted_impurity(n - nl, s - ls, ss - lss);
            if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                let mut thr = a + (b - a) / 2.0;
                if thr >= b {
                    thr = a;
                }
                best = Some((gain, f, thr));
            }
        }
    }

    let Some((gain, feature, threshold)) = best else {
        return id;
    };
    if gain < -1e-12 {
        return id;
    }
    tree.gains[feature] += gain.max(0.0);
    let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x.get(i, feature) <= threshold);
    let left = grow_node(x, l, depth + 1, criterion, params, features, tree);
    let right = grow_node(x, r, depth + 1, criterion, params, features, tree);
    tree.nodes[id] = TreeNode::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn fit(rows: &[Vec<f64>], y: &[bool], params: TreeParams) -> Tree {
        let x = DenseMatrix::from_rows(rows).unwrap();
        let idx: Vec<usize> = (0..y.len()).collect();
        grow::<ChaCha8Rng>(&x, &idx, &Criterion::Gini(y), &params, FeatureSampling::All)
    }

    #[test]
    fn xor_needs_depth_two() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [false, true, true, false];
        let t = fit(&rows, &y, TreeParams::default());
        for (r, &l) in rows.iter().zip(&y) {
            assert_eq!(t.predict_row(r) > 0.5, l);
        }
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn stump_finds_midpoint() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 4.0, 7.0].iter().map(|&v| vec![0.3, v]).collect();
        let t = fit(&rows, &[false, false, true, true], TreeParams {
            max_depth: Some(1),
            ..Default::default()
        });
        match &t.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 1);
                assert_eq!(*threshold, 3.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pure_node_is_leaf() {
        let t = fit(&[vec![1.0], vec![2.0]], &[true, true], TreeParams::default());
        assert_eq!(t.nodes.len(), 1);
    }
}
