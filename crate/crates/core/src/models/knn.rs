use serde::{Deserialize, Serialize};

use super::tree::check_xy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct KNearestNeighbors<F> {
    pub k: usize,
    pub x: Matrix<F>,
    pub y: Vec<u8>,
}

pub fn fit_knn<F: Scalar>(x: &Matrix<F>, y: &[u8], params: &KnnParams) -> Result<KNearestNeighbors<F>> {
    check_xy(x, y)?;
    if params.k == 0 || params.k > x.rows() {
        return Err(Error::invalid(format!(
            "k = {} must lie in 1..={}",
            params.k,
            x.rows()
        )));
    }
    Ok(KNearestNeighbors {
        k: params.k,
        x: x.clone(),
        y: y.to_vec(),
    })
}

impl<F: Scalar> KNearestNeighbors<F> {
    /// Row indices of the `k` nearest training points; ties go to the lower index.
    pub fn neighbors(&self, q: &[F]) -> Vec<usize> {
        let mut d: Vec<(F, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| {
                let s = r.iter().zip(q).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<F>();
                (s, i)
            })
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        d.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    pub fn predict_proba(&self, q: &[F]) -> F {
        let bots = self.neighbors(q).iter().filter(|&&i| self.y[i] == 1).count();
        F::from_usize_lossy(bots) / F::from_usize_lossy(self.k)
    }
}
