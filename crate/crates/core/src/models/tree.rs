use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features drawn at random per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

/// Gini impurity of a two-class count pair.
pub fn gini(counts: [u64; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - (p0 * p0 + p1 * p1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Split<F> {
    pub feature_index: usize,
    /// Rows with `x[feature_index] <= threshold` go left.
    pub threshold: F,
    pub left: Box<TreeNode<F>>,
    pub right: Box<TreeNode<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TreeNode<F> {
    /// Training rows routed here, `[humans, bots]`.
    pub class_counts: [u64; 2],
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split<F>>,
}

impl<F: Scalar> TreeNode<F> {
    fn leaf(class_counts: [u64; 2]) -> Self {
        Self {
            class_counts,
            split: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn bot_fraction(&self) -> F {
        let n = self.class_counts[0] + self.class_counts[1];
        if n == 0 {
            return F::zero();
        }
        F::from_u64(self.class_counts[1]).unwrap() / F::from_u64(n).unwrap()
    }

    pub fn depth(&self) -> usize {
        match &self.split {
            None => 0,
            Some(s) => 1 + s.left.depth().max(s.right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match &self.split {
            None => 1,
            Some(s) => s.left.n_leaves() + s.right.n_leaves(),
        }
    }

    /// Visits every split node.
    pub fn for_each_split(&self, f: &mut impl FnMut(&TreeNode<F>, &Split<F>)) {
        if let Some(s) = &self.split {
            f(self, s);
            s.left.for_each_split(f);
            s.right.for_each_split(f);
        }
    }
}

/// CART classification tree with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DecisionTree<F> {
    pub params: TreeParams,
    pub n_features: usize,
    pub root: TreeNode<F>,
}

/// `sum over children of (a^2 + b^2) / n_child`, kept as an exact fraction
/// so equal-quality splits compare equal and ties resolve by scan order.
#[derive(Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(l: [u64; 2], r: [u64; 2]) -> Self {
        let sq = |c: [u64; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
        let nl = (l[0] + l[1]) as u128;
        let nr = (r[0] + r[1]) as u128;
        Self {
            num: sq(l) * nr + sq(r) * nl,
            den: nl * nr,
        }
    }

    /// Higher score means lower weighted child impurity.
    fn better_than(&self, other: &Self) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Builder<'a, F> {
    x: &'a Matrix<F>,
    y: &'a [u8],
    params: &'a TreeParams,
    rng: ChaCha8Rng,
}

fn counts_of(y: &[u8], idx: &[usize]) -> [u64; 2] {
    let bots = idx.iter().filter(|&&i| y[i] != 0).count() as u64;
    [idx.len() as u64 - bots, bots]
}

impl<F: Scalar> Builder<'_, F> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.cols();
        match self.params.max_features {
            Some(m) if m < p => {
                let mut all: Vec<usize> = (0..p).collect();
                for i in 0..m {
                    let j = self.rng.random_range(i..p);
                    all.swap(i, j);
                }
                let mut chosen = all[..m].to_vec();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, idx: &[usize], counts: [u64; 2]) -> Option<(usize, F)> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let n = idx.len();
        let mut best: Option<(SplitScore, usize, F)> = None;
        let mut sorted: Vec<(F, u8)> = Vec::with_capacity(n);
        for feature in self.candidate_features() {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.x.get(i, feature), self.y[i])));
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
            let mut left = [0u64; 2];
            for i in 1..n {
                left[(sorted[i - 1].1 != 0) as usize] += 1;
                if sorted[i - 1].0 == sorted[i].0 || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let score = SplitScore::new(left, right);
                if best.as_ref().is_none_or(|(b, _, _)| score.better_than(b)) {
                    let (lo, hi) = (sorted[i - 1].0, sorted[i].0);
                    let mut t = (lo + hi) * F::half();
                    if t >= hi {
                        t = lo;
                    }
                    best = Some((score, feature, t));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> TreeNode<F> {
        let counts = counts_of(self.y, &idx);
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_done = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_done || idx.len() < 2 * self.params.min_samples_leaf.max(1) {
            return TreeNode::leaf(counts);
        }
        let Some((feature, threshold)) = self.best_split(&idx, counts) else {
            return TreeNode::leaf(counts);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.x.get(i, feature) <= threshold);
        TreeNode {
            class_counts: counts,
            split: Some(Split {
                feature_index: feature,
                threshold,
                left: Box::new(self.grow(l, depth + 1)),
                right: Box::new(self.grow(r, depth + 1)),
            }),
        }
    }
}

pub(crate) fn check_xy<F: Scalar>(x: &Matrix<F>, y: &[u8]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("empty training matrix"));
    }
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    if !x.all_finite() {
        return Err(Error::invalid("training matrix has non-finite values"));
    }
    Ok(())
}

/// Fits a tree on the rows listed in `rows` (repeats allowed).
pub fn fit_tree_on<F: Scalar>(
    x: &Matrix<F>,
    y: &[u8],
    rows: Vec<usize>,
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree<F>> {
    check_xy(x, y)?;
    if rows.is_empty() {
        return Err(Error::invalid("empty training sample"));
    }
    let mut b = Builder {
        x,
        y,
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    Ok(DecisionTree {
        params: params.clone(),
        n_features: x.cols(),
        root: b.grow(rows, 0),
    })
}

/// Fits a tree on every row. `seed` only matters when `max_features` subsamples.
pub fn fit_tree<F: Scalar>(
    x: &Matrix<F>,
    y: &[u8],
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree<F>> {
    fit_tree_on(x, y, (0..x.rows()).collect(), params, seed)
}

impl<F: Scalar> DecisionTree<F> {
    pub fn leaf_for(&self, x: &[F]) -> &TreeNode<F> {
        let mut node = &self.root;
        while let Some(s) = &node.split {
            node = if x[s.feature_index] <= s.threshold {
                &s.left
            } else {
                &s.right
            };
        }
        node
    }

    pub fn predict_proba(&self, x: &[F]) -> F {
        self.leaf_for(x).bot_fraction()
    }

    /// Total weighted Gini decrease per feature (unnormalized).
    pub fn impurity_decrease(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_features];
        self.root.for_each_split(&mut |node, s| {
            let n = |c: [u64; 2]| (c[0] + c[1]) as f64;
            let dec = n(node.class_counts) * gini(node.class_counts)
                - n(s.left.class_counts) * gini(s.left.class_counts)
                - n(s.right.class_counts) * gini(s.right.class_counts);
            out[s.feature_index] += dec.max(0.0);
        });
        out
    }
}
