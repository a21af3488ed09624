use serde::{Deserialize, Serialize};

use super::tree::check_xy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Variance floor as a fraction of the largest per-feature variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        Self { var_smoothing: 1e-9 }
    }
}

/// Gaussian naive Bayes for two classes; index 0 = human, 1 = bot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct GaussianNB<F> {
    pub means: [Vec<F>; 2],
    pub variances: [Vec<F>; 2],
    pub priors: [F; 2],
}

pub fn fit_gnb<F: Scalar>(x: &Matrix<F>, y: &[u8], params: &GnbParams) -> Result<GaussianNB<F>> {
    check_xy(x, y)?;
    let p = x.cols();
    let rows_of = |c: u8| -> Vec<usize> { (0..x.rows()).filter(|&i| y[i] == c).collect() };
    let classes = [rows_of(0), rows_of(1)];
    if classes.iter().any(Vec::is_empty) {
        return Err(Error::invalid("naive Bayes needs both classes"));
    }
    let moments = |rows: &[usize], j: usize| {
        let n = F::from_usize_lossy(rows.len());
        let m = rows.iter().map(|&i| x.get(i, j)).sum::<F>() / n;
        let v = rows.iter().map(|&i| (x.get(i, j) - m).powi(2)).sum::<F>() / n;
        (m, v)
    };
    let all: Vec<usize> = (0..x.rows()).collect();
    let max_var = (0..p).map(|j| moments(&all, j).1).fold(F::zero(), F::max);
    let floor = F::from_f64_lossy(params.var_smoothing) * if max_var > F::zero() { max_var } else { F::one() };
    let mut means = [Vec::new(), Vec::new()];
    let mut variances = [Vec::new(), Vec::new()];
    for c in 0..2 {
        for j in 0..p {
            let (m, v) = moments(&classes[c], j);
            means[c].push(m);
            variances[c].push(v + floor);
        }
    }
    let n = F::from_usize_lossy(x.rows());
    let priors = [
        F::from_usize_lossy(classes[0].len()) / n,
        F::from_usize_lossy(classes[1].len()) / n,
    ];
    Ok(GaussianNB {
        means,
        variances,
        priors,
    })
}

impl<F: Scalar> GaussianNB<F> {
    pub fn from_parameters(means: [Vec<F>; 2], variances: [Vec<F>; 2], priors: [F; 2]) -> Result<Self> {
        let p = means[0].len();
        if means[1].len() != p || variances.iter().any(|v| v.len() != p) {
            return Err(Error::invalid("parameter vectors disagree in length"));
        }
        if variances.iter().flatten().any(|v| *v <= F::zero()) {
            return Err(Error::invalid("variances must be positive"));
        }
        Ok(Self { means, variances, priors })
    }

    /// Log prior plus summed Gaussian log densities, per class.
    pub fn joint_log_likelihood(&self, x: &[F]) -> [F; 2] {
        let two_pi = F::from_f64_lossy(std::f64::consts::TAU);
        let half = F::half();
        let mut out = [F::zero(); 2];
        for c in 0..2 {
            let mut s = self.priors[c].ln();
            for ((&v, &m), &s2) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                s = s - half * (two_pi * s2).ln() - (v - m) * (v - m) / (s2 + s2);
            }
            out[c] = s;
        }
        out
    }

    pub fn predict_proba(&self, x: &[F]) -> F {
        let [l0, l1] = self.joint_log_likelihood(x);
        let m = l0.max(l1);
        let e0 = (l0 - m).exp();
        let e1 = (l1 - m).exp();
        e1 / (e0 + e1)
    }
}
