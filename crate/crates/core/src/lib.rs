//! Bot account detection for open-source collaboration event logs.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod events;
pub mod features;
pub mod matrix;
pub mod models;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

/// Ensemble over `f64`, the precision the CLI uses.
pub type Ensemble = models::EnsembleModel<f64>;
pub type Ensemble32 = models::EnsembleModel<f32>;
pub type Tree = models::DecisionTree<f64>;
pub type Forest = models::RandomForest<f64>;
pub type FeatureMatrix = Matrix<f64>;
