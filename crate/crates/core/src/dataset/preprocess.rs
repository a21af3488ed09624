use serde::{Deserialize, Serialize};

use super::RawRow;
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FEATURE_KINDS, FEATURE_NAMES, N_FEATURES};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::stats::{mean, median, population_std};

/// Fitted encoding of one feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub name: String,
    pub kind: FeatureKind,
    /// Value substituted for a missing entry (training median of the raw values).
    pub fill: f64,
    /// No training value was present; `fill` defaulted to 0.
    pub all_missing: bool,
    pub log1p: bool,
    pub center: f64,
    pub scale: f64,
}

impl ColumnTransform {
    pub fn apply(&self, v: Option<f64>) -> f64 {
        let v = v.unwrap_or(self.fill);
        if self.kind == FeatureKind::Binary {
            return v;
        }
        let v = if self.log1p { v.ln_1p() } else { v };
        (v - self.center) / self.scale
    }
}

/// Imputation and standardization parameters fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub columns: Vec<ColumnTransform>,
}

impl Preprocessing {
    pub fn fit(rows: &[RawRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("cannot fit preprocessing on zero rows"));
        }
        let columns = (0..N_FEATURES)
            .map(|j| {
                let present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
                let (fill, all_missing) = match median(&present) {
                    Some(m) => (m, false),
                    None => (0.0, true),
                };
                let kind = FEATURE_KINDS[j];
                let mut col = ColumnTransform {
                    name: FEATURE_NAMES[j].to_string(),
                    kind,
                    fill,
                    all_missing,
                    log1p: kind == FeatureKind::Count,
                    center: 0.0,
                    scale: 1.0,
                };
                if kind != FeatureKind::Binary {
                    let encoded: Vec<f64> = rows
                        .iter()
                        .map(|r| {
                            let v = r[j].unwrap_or(fill);
                            if col.log1p { v.ln_1p() } else { v }
                        })
                        .collect();
                    col.center = mean(&encoded).unwrap_or(0.0);
                    let sd = population_std(&encoded).unwrap_or(0.0);
                    col.scale = if sd > 0.0 { sd } else { 1.0 };
                }
                col
            })
            .collect();
        Ok(Self { columns })
    }

    pub fn transform_row<F: Scalar>(&self, row: &RawRow) -> Vec<F> {
        self.columns
            .iter()
            .zip(row.iter())
            .map(|(c, v)| F::from_f64_lossy(c.apply(*v)))
            .collect()
    }

    pub fn transform<F: Scalar>(&self, rows: &[RawRow]) -> Matrix<F> {
        let data: Vec<F> = rows.iter().flat_map(|r| self.transform_row::<F>(r)).collect();
        Matrix::new(rows.len(), N_FEATURES, data).expect("row width is fixed")
    }
}
