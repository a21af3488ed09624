use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_xy, fit_tree_on, DecisionTree, TreeParams};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Per-split feature subset size; `None` means round(sqrt(n_features)).
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn resolved_max_features(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| ((n_features as f64).sqrt().round() as usize).max(1))
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RandomForest<F> {
    pub params: ForestParams,
    pub trees: Vec<DecisionTree<F>>,
}

pub fn fit_forest<F: Scalar>(
    x: &Matrix<F>,
    y: &[u8],
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest<F>> {
    check_xy(x, y)?;
    let n = x.rows();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        max_features: Some(params.resolved_max_features(x.cols())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans: Vec<(Vec<usize>, u64)> = (0..params.n_trees.max(1))
        .map(|_| {
            let rows = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            (rows, rng.random())
        })
        .collect();
    let trees = plans
        .into_par_iter()
        .map(|(rows, s)| fit_tree_on(x, y, rows, &tree_params, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest {
        params: params.clone(),
        trees,
    })
}

impl<F: Scalar> RandomForest<F> {
    /// Mean of the member trees' leaf bot fractions.
    pub fn predict_proba(&self, x: &[F]) -> F {
        let sum: F = self.trees.iter().map(|t| t.predict_proba(x)).sum();
        sum / F::from_usize_lossy(self.trees.len())
    }
}
