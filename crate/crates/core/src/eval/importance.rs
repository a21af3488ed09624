use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cv::derive_seed;
use super::metrics::roc_auc;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::models::{DecisionTree, EnsembleModel, Scorer};
use crate::scalar::Scalar;

/// Mean AUC drop per feature when that column is shuffled; may be negative.
pub fn permutation_importance<F, S>(
    model: &S,
    x: &Matrix<F>,
    y: &[u8],
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>>
where
    F: Scalar,
    S: Scorer<F> + Sync,
{
    if repeats == 0 {
        return Err(Error::invalid("need at least one permutation repeat"));
    }
    let (_, scores) = model.score_rows(x)?;
    let (_, base) = roc_auc(y, &scores)?;
    (0..x.cols())
        .into_par_iter()
        .map(|j| {
            let original = x.column(j);
            let mut xp = x.clone();
            let mut total = 0.0;
            for r in 0..repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, j as u64, r as u64));
                let mut col = original.clone();
                col.shuffle(&mut rng);
                for (i, v) in col.into_iter().enumerate() {
                    xp.set(i, j, v);
                }
                let (_, s) = model.score_rows(&xp)?;
                total += base - roc_auc(y, &s)?.1;
            }
            Ok(total / repeats as f64)
        })
        .collect()
}

/// Normalized Gini-decrease weights averaged over trees.
///
/// Each tree's totals are normalized before averaging; trees without any
/// split contribute nothing. All-zero when no tree splits at all.
pub fn impurity_importance_trees<F: Scalar>(trees: &[&DecisionTree<F>], n_features: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n_features];
    for t in trees {
        let dec = t.impurity_decrease();
        let s: f64 = dec.iter().sum();
        if s > 0.0 {
            for (a, d) in acc.iter_mut().zip(dec) {
                *a += d / s;
            }
        }
    }
    let s: f64 = acc.iter().sum();
    if s > 0.0 {
        acc.iter_mut().for_each(|a| *a /= s);
    }
    acc
}

pub fn impurity_importance<F: Scalar>(model: &EnsembleModel<F>) -> Result<Vec<f64>> {
    let mut trees = Vec::new();
    for m in &model.members {
        match m.trees() {
            Some(ts) => trees.extend(ts),
            None => {
                return Err(Error::Unsupported(format!(
                    "impurity importance needs tree-based members, model is {}",
                    model.kind()
                )))
            }
        }
    }
    Ok(impurity_importance_trees(&trees, model.n_features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit_bagging, fit_tree, BaggingConfig, BaseParams, LogRegParams, TreeParams};
    use rand::Rng;

    fn signal_data(n: usize, seed: u64) -> (Matrix<f64>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let label = u8::from(rng.random_bool(0.5));
            let signal = f64::from(label) * 1.5 + rng.random::<f64>();
            rows.push(vec![rng.random::<f64>(), signal, rng.random::<f64>()]);
            y.push(label);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn depth_one_tree_puts_all_weight_on_its_split() {
        let (x, y) = signal_data(200, 1);
        let p = TreeParams { max_depth: Some(1), ..TreeParams::default() };
        let t = fit_tree(&x, &y, &p, 0).unwrap();
        assert_eq!(impurity_importance_trees(&[&t], 3), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn forest_weights_sum_to_one() {
        let (x, y) = signal_data(150, 2);
        let m = fit_bagging(&x, &y, &BaggingConfig { members: 3, ..BaggingConfig::default() }, 4).unwrap();
        let w = impurity_importance(&m).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&v| v >= 0.0));
        let lr = BaggingConfig { members: 1, ..BaggingConfig::new(BaseParams::LogisticRegression(LogRegParams::default())) };
        let m = fit_bagging(&x, &y, &lr, 4).unwrap();
        assert!(matches!(impurity_importance(&m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn signal_column_dominates_and_unused_is_zero() {
        let (x, y) = signal_data(400, 3);
        let cfg = BaggingConfig {
            members: 5,
            ..BaggingConfig::new(BaseParams::DecisionTree(TreeParams { max_depth: Some(1), ..TreeParams::default() }))
        };
        let m = fit_bagging(&x, &y, &cfg, 5).unwrap();
        let imp = permutation_importance(&m, &x, &y, 10, 7).unwrap();
        assert!(imp[1] > imp[0] && imp[1] > imp[2]);
        assert!(imp[0].abs() < 0.01 && imp[2].abs() < 0.01);
    }
}
