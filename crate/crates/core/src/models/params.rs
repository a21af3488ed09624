use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ForestParams, GnbParams, KnnParams, LogRegParams, TreeParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    DecisionTree,
    RandomForest,
    LogisticRegression,
    GaussianNB,
    KNearestNeighbors,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "tree" | "decisiontree" => Ok(Self::DecisionTree),
            "forest" | "randomforest" => Ok(Self::RandomForest),
            "logreg" | "logisticregression" => Ok(Self::LogisticRegression),
            "gnb" | "gaussiannb" | "naivebayes" => Ok(Self::GaussianNB),
            "knn" | "knearestneighbors" => Ok(Self::KNearestNeighbors),
            other => Err(Error::invalid(format!("unknown model kind {other:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DecisionTree => "tree",
            Self::RandomForest => "forest",
            Self::LogisticRegression => "logreg",
            Self::GaussianNB => "gnb",
            Self::KNearestNeighbors => "knn",
        })
    }
}

/// Hyperparameters of one base classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum BaseParams {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    LogisticRegression(LogRegParams),
    GaussianNB(GnbParams),
    KNearestNeighbors(KnnParams),
}

fn as_usize(name: &str, v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::invalid(format!("{name} expects a non-negative integer, got {v}")))
}

fn as_opt_usize(name: &str, v: &Value) -> Result<Option<usize>> {
    match v {
        Value::Null => Ok(None),
        Value::String(s) if matches!(s.as_str(), "unlimited" | "none" | "null") => Ok(None),
        _ => as_usize(name, v).map(Some),
    }
}

fn as_f64(name: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::invalid(format!("{name} expects a number, got {v}")))
}

fn as_bool(name: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::invalid(format!("{name} expects true/false, got {v}")))
}

impl BaseParams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::DecisionTree => Self::DecisionTree(TreeParams::default()),
            ModelKind::RandomForest => Self::RandomForest(ForestParams::default()),
            ModelKind::LogisticRegression => Self::LogisticRegression(LogRegParams::default()),
            ModelKind::GaussianNB => Self::GaussianNB(GnbParams::default()),
            ModelKind::KNearestNeighbors => Self::KNearestNeighbors(KnnParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::DecisionTree(_) => ModelKind::DecisionTree,
            Self::RandomForest(_) => ModelKind::RandomForest,
            Self::LogisticRegression(_) => ModelKind::LogisticRegression,
            Self::GaussianNB(_) => ModelKind::GaussianNB,
            Self::KNearestNeighbors(_) => ModelKind::KNearestNeighbors,
        }
    }

    /// Sets one named hyperparameter from a JSON value.
    pub fn set(&mut self, name: &str, v: &Value) -> Result<()> {
        let kind = self.kind();
        let unknown = || Error::invalid(format!("{name} is not a parameter of {kind}"));
        match self {
            Self::DecisionTree(p) => match name {
                "max_depth" => p.max_depth = as_opt_usize(name, v)?,
                "min_samples_leaf" => p.min_samples_leaf = as_usize(name, v)?,
                "max_features" => p.max_features = as_opt_usize(name, v)?,
                _ => return Err(unknown()),
            },
            Self::RandomForest(p) => match name {
                "n_trees" => p.n_trees = as_usize(name, v)?.max(1),
                "max_depth" => p.max_depth = as_opt_usize(name, v)?,
                "min_samples_leaf" => p.min_samples_leaf = as_usize(name, v)?,
                "max_features" => p.max_features = as_opt_usize(name, v)?,
                "bootstrap" => p.bootstrap = as_bool(name, v)?,
                _ => return Err(unknown()),
            },
            Self::LogisticRegression(p) => match name {
                "l2_lambda" => p.l2_lambda = as_f64(name, v)?,
                "learning_rate" => p.learning_rate = as_f64(name, v)?,
                "max_iters" => p.max_iters = as_usize(name, v)?,
                "tol" => p.tol = as_f64(name, v)?,
                _ => return Err(unknown()),
            },
            Self::GaussianNB(p) => match name {
                "var_smoothing" => p.var_smoothing = as_f64(name, v)?,
                _ => return Err(unknown()),
            },
            Self::KNearestNeighbors(p) => match name {
                "k" => p.k = as_usize(name, v)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }
}
