use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{BaggingConfig, ModelKind};
use crate::dataset::TrainingSet;
use crate::error::{Error, Result};
use crate::eval::{cross_validate, CvOptions, CvReport};
use crate::scalar::Scalar;

/// Ordered hyperparameter grid: name to candidate values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamGrid {
    entries: Vec<(String, Vec<Value>)>,
}

impl ParamGrid {
    /// From a JSON object; a non-array value is a single candidate.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::invalid("grid must be a JSON object"))?;
        let entries = obj
            .iter()
            .map(|(k, v)| {
                let vals = match v {
                    Value::Array(a) => a.clone(),
                    other => vec![other.clone()],
                };
                if vals.is_empty() {
                    return Err(Error::invalid(format!("grid entry {k} has no values")));
                }
                Ok((k.clone(), vals))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn single() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn default_for(kind: ModelKind) -> Self {
        let v = match kind {
            ModelKind::RandomForest => json!({
                "max_depth": [8, 16, null],
                "min_samples_leaf": [1, 5],
                "n_trees": [50, 100],
            }),
            ModelKind::DecisionTree => json!({
                "max_depth": [4, 8, 16, null],
                "min_samples_leaf": [1, 5],
            }),
            ModelKind::LogisticRegression => json!({ "l2_lambda": [0.001, 0.01, 0.1] }),
            ModelKind::GaussianNB => json!({ "var_smoothing": [1e-9] }),
            ModelKind::KNearestNeighbors => json!({ "k": [3, 5, 9] }),
        };
        Self::from_json(&v).expect("built-in grid is valid")
    }

    /// Number of combinations.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product in grid order, last key varying fastest.
    pub fn combinations(&self) -> Vec<Map<String, Value>> {
        let mut out = vec![Map::new()];
        for (k, vals) in &self.entries {
            out = out
                .into_iter()
                .flat_map(|m| {
                    vals.iter().map(move |v| {
                        let mut m = m.clone();
                        m.insert(k.clone(), v.clone());
                        m
                    })
                })
                .collect();
        }
        out
    }
}

/// Applies one grid combination on top of a base configuration.
pub fn apply_combination(base: &BaggingConfig, combo: &Map<String, Value>) -> Result<BaggingConfig> {
    let mut c = base.clone();
    for (k, v) in combo {
        match k.as_str() {
            "members" => {
                c.members = v
                    .as_u64()
                    .ok_or_else(|| Error::invalid("members expects an integer"))?
                    as usize
            }
            _ => c.base.set(k, v)?,
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub params: Map<String, Value>,
    pub config: BaggingConfig,
    pub cv: CvReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome {
    pub best: usize,
    pub results: Vec<GridResult>,
}

impl GridOutcome {
    pub fn best_result(&self) -> &GridResult {
        &self.results[self.best]
    }
}

/// Cross-validates every combination on the same partitions and picks the
/// highest mean AUC, then the highest mean F1, then the earliest.
pub fn grid_search_cv<F: Scalar>(
    set: &TrainingSet,
    base: &BaggingConfig,
    grid: &ParamGrid,
    opts: &CvOptions,
) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::invalid("grid has no combinations"));
    }
    let mut results = Vec::new();
    for combo in grid.combinations() {
        let config = apply_combination(base, &combo)?;
        let cv = cross_validate::<F, _>(set, &config, opts)?;
        results.push(GridResult {
            params: combo,
            config,
            cv,
        });
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        let (a, b) = (&r.cv.summary, &results[best].cv.summary);
        if a.auc.mean > b.auc.mean || (a.auc.mean == b.auc.mean && a.f1.mean > b.f1.mean) {
            best = i;
        }
    }
    Ok(GridOutcome { best, results })
}
