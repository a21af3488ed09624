//! Weak classifiers written from scratch and the bagging ensemble that
//! combines them by hard majority vote.

mod bagging;
mod forest;
mod gnb;
mod grid;
mod knn;
mod logreg;
mod params;
mod tree;

pub use bagging::{
    bootstrap_indices, fit_bagging, BaggingConfig, EnsembleModel, Vote, MODEL_FORMAT_VERSION,
};
pub use forest::{fit_forest, ForestParams, RandomForest};
pub use gnb::{fit_gnb, GaussianNB, GnbParams};
pub use grid::{apply_combination, grid_search_cv, GridOutcome, GridResult, ParamGrid};
pub use knn::{fit_knn, KNearestNeighbors, KnnParams};
pub use logreg::{fit_logreg, loss_and_gradient, LogRegParams, LogisticRegression};
pub use params::{BaseParams, ModelKind};
pub use tree::{fit_tree, fit_tree_on, gini, DecisionTree, Split, TreeNode, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// A fitted member of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", tag = "kind")]
pub enum WeakClassifier<F> {
    DecisionTree(DecisionTree<F>),
    RandomForest(RandomForest<F>),
    LogisticRegression(LogisticRegression<F>),
    GaussianNB(GaussianNB<F>),
    KNearestNeighbors(KNearestNeighbors<F>),
}

impl<F: Scalar> WeakClassifier<F> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::DecisionTree(_) => ModelKind::DecisionTree,
            Self::RandomForest(_) => ModelKind::RandomForest,
            Self::LogisticRegression(_) => ModelKind::LogisticRegression,
            Self::GaussianNB(_) => ModelKind::GaussianNB,
            Self::KNearestNeighbors(_) => ModelKind::KNearestNeighbors,
        }
    }

    pub fn predict_proba(&self, x: &[F]) -> F {
        match self {
            Self::DecisionTree(m) => m.predict_proba(x),
            Self::RandomForest(m) => m.predict_proba(x),
            Self::LogisticRegression(m) => m.predict_proba(x),
            Self::GaussianNB(m) => m.predict_proba(x),
            Self::KNearestNeighbors(m) => m.predict_proba(x),
        }
    }

    /// The member's own hard vote: bot when its probability reaches one half.
    pub fn vote(&self, x: &[F]) -> bool {
        self.predict_proba(x) >= F::half()
    }

    /// Trees making up this member, if it is tree based.
    pub fn trees(&self) -> Option<Vec<&DecisionTree<F>>> {
        match self {
            Self::DecisionTree(t) => Some(vec![t]),
            Self::RandomForest(f) => Some(f.trees.iter().collect()),
            _ => None,
        }
    }
}

/// Fits one base classifier on the given rows.
pub fn fit_base<F: Scalar>(
    params: &BaseParams,
    x: &Matrix<F>,
    y: &[u8],
    seed: u64,
) -> Result<WeakClassifier<F>> {
    Ok(match params {
        BaseParams::DecisionTree(p) => WeakClassifier::DecisionTree(fit_tree(x, y, p, seed)?),
        BaseParams::RandomForest(p) => WeakClassifier::RandomForest(fit_forest(x, y, p, seed)?),
        BaseParams::LogisticRegression(p) => WeakClassifier::LogisticRegression(fit_logreg(x, y, p)?),
        BaseParams::GaussianNB(p) => WeakClassifier::GaussianNB(fit_gnb(x, y, p)?),
        BaseParams::KNearestNeighbors(p) => WeakClassifier::KNearestNeighbors(fit_knn(x, y, p)?),
    })
}

/// Anything that scores preprocessed feature rows.
pub trait Scorer<F: Scalar> {
    fn n_features(&self) -> usize;

    /// Hard label and continuous score for one row.
    fn classify(&self, x: &[F]) -> Result<(u8, F)>;

    fn score_rows(&self, x: &Matrix<F>) -> Result<(Vec<u8>, Vec<F>)> {
        let mut labels = Vec::with_capacity(x.rows());
        let mut scores = Vec::with_capacity(x.rows());
        for r in x.iter_rows() {
            let (l, s) = self.classify(r)?;
            labels.push(l);
            scores.push(s);
        }
        Ok((labels, scores))
    }
}

/// A training recipe that produces a [`Scorer`].
pub trait Learner<F: Scalar>: Sync {
    type Model: Scorer<F> + Send;

    fn fit(&self, x: &Matrix<F>, y: &[u8], seed: u64) -> Result<Self::Model>;
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
