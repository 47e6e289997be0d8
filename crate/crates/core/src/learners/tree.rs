//! CART trees: Gini classification trees and squared-error regression trees.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! a feature among the node's samples. Rows go left when `x[f] <= threshold`.
//! Among equally good splits (within 1e-12) the lower feature index wins,
//! then the lower threshold.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cohort::EncodedMatrix;
use crate::Scalar;

const TIE_EPS: f64 = 1e-12;

/// Gini impurity `1 - sum_c p_c^2`; 0 for an empty slice.
pub fn gini(labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let ones = labels.iter().filter(|&&y| y == 1).count() as f64;
    gini_counts(n - ones, ones)
}

fn gini_counts(zeros: f64, ones: f64) -> f64 {
    let n = zeros + ones;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (zeros / n, ones / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Number of candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    All,
    /// `max(1, floor(sqrt(p)))`.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(k) => k.clamp(1, p.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T, V> {
    Leaf(V),
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Arena-allocated binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T, V> {
    nodes: Vec<Node<T, V>>,
}

impl<T: Scalar, V> Tree<T, V> {
    pub fn nodes(&self) -> &[Node<T, V>] {
        &self.nodes
    }

    pub fn leaf_index(&self, x: &[T]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(_) => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf(&self, x: &[T]) -> &V {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(v) => v,
            Node::Split { .. } => unreachable!("leaf_index stops at a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T, V>(nodes: &[Node<T, V>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn push(&mut self, node: Node<T, V>) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

/// Class-count leaf of a classification tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassLeaf {
    pub counts: [usize; 2],
}

impl ClassLeaf {
    /// Majority class; ties go to 0.
    pub fn class(&self) -> u8 {
        u8::from(self.counts[1] > self.counts[0])
    }
}

pub type DecisionTree<T> = Tree<T, ClassLeaf>;

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    score: f64,
    feature: usize,
    threshold: T,
}

fn better<T: Scalar>(cand: &Candidate<T>, best: &Option<Candidate<T>>) -> bool {
    match best {
        None => true,
        Some(b) => {
            if cand.score < b.score - TIE_EPS {
                true
            } else if cand.score > b.score + TIE_EPS {
                false
            } else {
                (cand.feature, cand.threshold) < (b.feature, b.threshold)
            }
        }
    }
}

fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = (lo + hi) / T::of(2.0);
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Feature visiting order: ascending, or a random permutation when only a
/// subset is examined per split.
fn feature_order<R: Rng>(p: usize, subset: usize, rng: &mut Option<R>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p).collect();
    if subset < p {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
    }
    order
}

fn sorted_by_feature<T: Scalar>(x: &EncodedMatrix<T>, idx: &[usize], f: usize) -> Vec<usize> {
    let mut sorted = idx.to_vec();
    sorted.sort_by(|&a, &b| {
        x.row(a)[f]
            .partial_cmp(&x.row(b)[f])
            .expect("finite features")
            .then(a.cmp(&b))
    });
    sorted
}

/// Fits a Gini tree on the (possibly repeated) row indices `idx`. The RNG
/// is only consulted when `max_features` restricts the candidate set.
pub fn fit_classification_tree<T: Scalar, R: Rng>(
    x: &EncodedMatrix<T>,
    idx: &[usize],
    params: &TreeParams,
    rng: Option<R>,
) -> DecisionTree<T> {
    let mut tree = Tree { nodes: Vec::new() };
    let mut rng = rng;
    grow_classification(&mut tree, x, idx.to_vec(), 0, params, &mut rng);
    tree
}

fn counts_of<T: Scalar>(x: &EncodedMatrix<T>, idx: &[usize]) -> [usize; 2] {
    let ones = idx.iter().filter(|&&i| x.labels()[i] == 1).count();
    [idx.len() - ones, ones]
}

fn grow_classification<T: Scalar, R: Rng>(
    tree: &mut DecisionTree<T>,
    x: &EncodedMatrix<T>,
    idx: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut Option<R>,
) -> usize {
    let counts = counts_of(x, &idx);
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_reached || idx.len() < params.min_samples_split.max(2) {
        return tree.push(Node::Leaf(ClassLeaf { counts }));
    }
    let Some(best) = best_gini_split(x, &idx, params.max_features, rng) else {
        return tree.push(Node::Leaf(ClassLeaf { counts }));
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| x.row(i)[best.feature] <= best.threshold);
    let at = tree.push(Node::Leaf(ClassLeaf { counts }));
    let left = grow_classification(tree, x, left_idx, depth + 1, params, rng);
    let right = grow_classification(tree, x, right_idx, depth + 1, params, rng);
    tree.nodes[at] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
    };
    at
}

fn best_gini_split<T: Scalar, R: Rng>(
    x: &EncodedMatrix<T>,
    idx: &[usize],
    max_features: MaxFeatures,
    rng: &mut Option<R>,
) -> Option<Candidate<T>> {
    let p = x.n_cols();
    let wanted = max_features.resolve(p);
    let n = idx.len() as f64;
    let total = counts_of(x, idx);
    let mut best: Option<Candidate<T>> = None;
    let mut visited = 0;
    for f in feature_order(p, wanted, rng) {
        // Keep drawing features past the quota until some valid split exists.
        if visited >= wanted && best.is_some() {
            break;
        }
        visited += 1;
        let sorted = sorted_by_feature(x, idx, f);
        let mut left = [0usize; 2];
        for w in 0..sorted.len() - 1 {
            left[usize::from(x.labels()[sorted[w]])] += 1;
            let (lo, hi) = (x.row(sorted[w])[f], x.row(sorted[w + 1])[f]);
            if !(lo < hi) {
                continue;
            }
            let nl = (w + 1) as f64;
            let right = [total[0] - left[0], total[1] - left[1]];
            let score = (nl * gini_counts(left[0] as f64, left[1] as f64)
                + (n - nl) * gini_counts(right[0] as f64, right[1] as f64))
                / n;
            let cand = Candidate {
                score,
                feature: f,
                threshold: midpoint(lo, hi),
            };
            if better(&cand, &best) {
                best = Some(cand);
            }
        }
    }
    best
}

pub type RegressionTree<T> = Tree<T, T>;

/// Squared-error regression tree on `targets` (indexed like the rows of
/// `x`). Leaf values are set to the mean target; callers may overwrite them
/// with [`set_leaf_values`].
pub fn fit_regression_tree<T: Scalar>(
    x: &EncodedMatrix<T>,
    targets: &[T],
    idx: &[usize],
    max_depth: usize,
    min_samples_split: usize,
) -> RegressionTree<T> {
    let mut tree = Tree { nodes: Vec::new() };
    grow_regression(&mut tree, x, targets, idx.to_vec(), 0, max_depth, min_samples_split.max(2));
    tree
}

fn grow_regression<T: Scalar>(
    tree: &mut RegressionTree<T>,
    x: &EncodedMatrix<T>,
    targets: &[T],
    idx: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_split: usize,
) -> usize {
    let n = T::of_usize(idx.len());
    let sum: T = idx.iter().map(|&i| targets[i]).sum();
    let mean = sum / n;
    let sse: T = idx.iter().map(|&i| (targets[i] - mean) * (targets[i] - mean)).sum();
    if depth >= max_depth || idx.len() < min_split || sse <= T::of(1e-14) * n {
        return tree.push(Node::Leaf(mean));
    }
    let mut best: Option<Candidate<T>> = None;
    for f in 0..x.n_cols() {
        let sorted = sorted_by_feature(x, &idx, f);
        let mut left_sum = T::zero();
        for w in 0..sorted.len() - 1 {
            left_sum = left_sum + targets[sorted[w]];
            let (lo, hi) = (x.row(sorted[w])[f], x.row(sorted[w + 1])[f]);
            if !(lo < hi) {
                continue;
            }
            let nl = T::of_usize(w + 1);
            let right_sum = sum - left_sum;
            // Minimising SSE is maximising sum_l^2/n_l + sum_r^2/n_r.
            let gain = left_sum * left_sum / nl + right_sum * right_sum / (n - nl);
            let cand = Candidate {
                score: -gain.as_f64(),
                feature: f,
                threshold: midpoint(lo, hi),
            };
            if better(&cand, &best) {
                best = Some(cand);
            }
        }
    }
    let Some(best) = best else {
        return tree.push(Node::Leaf(mean));
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| x.row(i)[best.feature] <= best.threshold);
    let at = tree.push(Node::Leaf(mean));
    let left = grow_regression(tree, x, targets, left_idx, depth + 1, max_depth, min_split);
    let right = grow_regression(tree, x, targets, right_idx, depth + 1, max_depth, min_split);
    tree.nodes[at] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
    };
    at
}

/// Replaces each leaf value by `value(leaf node index)`.
pub fn set_leaf_values<T: Scalar>(tree: &mut RegressionTree<T>, mut value: impl FnMut(usize) -> T) {
    for (i, node) in tree.nodes.iter_mut().enumerate() {
        if let Node::Leaf(v) = node {
            *v = value(i);
        }
    }
}
