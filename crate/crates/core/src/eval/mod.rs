//! Metrics, ROC analysis, cross-validation and feature importance.

mod chi2;
mod cv;
mod importance;
mod metrics;

pub use chi2::{chi_squared, chi_squared_critical_95, ChiSquared};
pub use cv::{cross_validate, derive_seed, CvOptions, CvReport, CvSummary, FoldOutcome, MetricSummary};
pub use importance::{impurity_importance, impurity_importance_trees, permutation_importance};
pub use metrics::{confusion_metrics, evaluate_scores, roc_auc, Confusion, MetricsReport, RocPoint};
