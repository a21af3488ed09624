use serde::{Deserialize, Serialize};

use super::tree::check_xy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            l2_lambda: 0.01,
            learning_rate: 0.5,
            max_iters: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct LogisticRegression<F> {
    pub params: LogRegParams,
    pub weights: Vec<F>,
    pub bias: F,
    pub iterations: usize,
}

fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<F: Scalar>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean logistic loss plus `lambda * |w|^2 / 2`, with its gradient in
/// `(weights, bias)`. The bias is not regularized.
pub fn loss_and_gradient<F: Scalar>(
    x: &Matrix<F>,
    y: &[u8],
    weights: &[F],
    bias: F,
    lambda: F,
) -> (F, Vec<F>, F) {
    let n = F::from_usize_lossy(x.rows());
    let mut loss = F::zero();
    let mut gw = vec![F::zero(); weights.len()];
    let mut gb = F::zero();
    for (row, &label) in x.iter_rows().zip(y) {
        let t = F::from_u8(label).unwrap();
        let z = row.iter().zip(weights).map(|(a, w)| *a * *w).sum::<F>() + bias;
        loss = loss + softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, a) in gw.iter_mut().zip(row) {
            *g = *g + r * *a;
        }
        gb = gb + r;
    }
    let half = F::half();
    let reg = weights.iter().map(|w| *w * *w).sum::<F>() * lambda * half;
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + lambda * *w;
    }
    (loss / n + reg, gw, gb / n)
}

pub fn fit_logreg<F: Scalar>(x: &Matrix<F>, y: &[u8], params: &LogRegParams) -> Result<LogisticRegression<F>> {
    check_xy(x, y)?;
    if !(params.learning_rate > 0.0 && params.l2_lambda >= 0.0) {
        return Err(Error::invalid("learning rate must be positive and lambda non-negative"));
    }
    let lr = F::from_f64_lossy(params.learning_rate);
    let lambda = F::from_f64_lossy(params.l2_lambda);
    let tol = F::from_f64_lossy(params.tol);
    let mut w = vec![F::zero(); x.cols()];
    let mut b = F::zero();
    let mut iterations = 0;
    for _ in 0..params.max_iters {
        let (_, gw, gb) = loss_and_gradient(x, y, &w, b, lambda);
        let norm = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if norm < tol {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi = *wi - lr * *gi;
        }
        b = b - lr * gb;
        iterations += 1;
    }
    if !w.iter().all(|v| v.is_finite()) || !b.is_finite() {
        return Err(Error::Invariant("logistic regression diverged".into()));
    }
    Ok(LogisticRegression {
        params: params.clone(),
        weights: w,
        bias: b,
        iterations,
    })
}

impl<F: Scalar> LogisticRegression<F> {
    pub fn predict_proba(&self, x: &[F]) -> F {
        let z = x.iter().zip(&self.weights).map(|(a, w)| *a * *w).sum::<F>() + self.bias;
        sigmoid(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_d(xs: &[f64]) -> Matrix<f64> {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&v| [v]).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<[f64; 3]> = (0..30)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<u8> = (0..30).map(|_| rng.random_range(0..2)).collect();
        let lambda = 0.1;
        let h = 1e-5;
        for _ in 0..20 {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let b = rng.random_range(-1.0..1.0);
            let (_, gw, gb) = loss_and_gradient(&x, &y, &w, b, lambda);
            let mut params = w.clone();
            params.push(b);
            let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
            for k in 0..4 {
                let eval = |delta: f64| {
                    let mut p = params.clone();
                    p[k] += delta;
                    loss_and_gradient(&x, &y, &p[..3], p[3], lambda).0
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let rel = (numeric - analytic[k]).abs() / analytic[k].abs().max(1e-8);
                assert!(rel < 1e-5, "param {k}: {numeric} vs {} (rel {rel})", analytic[k]);
            }
        }
    }

    #[test]
    fn all_negative_stays_below_half() {
        let x = one_d(&[-1.0, 0.0, 0.5, 2.0]);
        let m = fit_logreg(&x, &[0, 0, 0, 0], &LogRegParams { l2_lambda: 0.1, ..Default::default() }).unwrap();
        assert!(x.iter_rows().all(|r| m.predict_proba(r) < 0.5));
        assert!(m.weights[0].is_finite() && m.bias.is_finite());
    }

    #[test]
    fn weight_sign_follows_class_direction() {
        let xs = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let x = one_d(&xs);
        let m = fit_logreg(&x, &y, &LogRegParams { l2_lambda: 0.1, ..Default::default() }).unwrap();
        // coarse grid over w locates the sign of the regularized minimum
        let best_w = (-40..=40)
            .map(|k| k as f64 * 0.25)
            .min_by(|a, b| {
                let la = loss_and_gradient(&x, &y, &[*a], 0.0, 0.1).0;
                let lb = loss_and_gradient(&x, &y, &[*b], 0.0, 0.1).0;
                la.partial_cmp(&lb).unwrap()
            })
            .unwrap();
        assert_eq!(m.weights[0].signum(), best_w.signum());
        assert!(m.weights[0] > 0.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        let x = one_d(&[f64::NAN, 1.0]);
        assert!(fit_logreg(&x, &[0, 1], &LogRegParams::default()).is_err());
    }
}
