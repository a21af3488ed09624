use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
    pub confusion: Confusion,
    pub roc: Vec<RocPoint>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Binary metrics with bot as the positive class.
pub fn confusion_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<MetricsReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one row"));
    }
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == 1, p == 1) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsReport {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
        auc: None,
        confusion: c,
        roc: Vec::new(),
    })
}

/// ROC curve over distinct score thresholds (descending) and its trapezoidal area.
///
/// The first point is (0, 0) at threshold +inf. A row is predicted positive at
/// threshold `t` when its score is `>= t`.
pub fn roc_auc<F: Scalar>(y_true: &[u8], scores: &[F]) -> Result<(Vec<RocPoint>, f64)> {
    if y_true.len() != scores.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let pos = y_true.iter().filter(|&&y| y == 1).count() as u64;
    let neg = y_true.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("roc needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area in units of one positive-negative pair
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += u128::from(fp - fp0) * u128::from(tp + tp0);
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s.to_f64_lossy(),
        });
    }
    let auc = area2 as f64 / (2.0 * pos as f64 * neg as f64);
    Ok((points, auc))
}

/// Confusion metrics from hard labels plus ROC/AUC from continuous scores.
pub fn evaluate_scores<F: Scalar>(y_true: &[u8], y_pred: &[u8], scores: &[F]) -> Result<MetricsReport> {
    let mut report = confusion_metrics(y_true, y_pred)?;
    let (roc, auc) = roc_auc(y_true, scores)?;
    report.roc = roc;
    report.auc = Some(auc);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_auc(y: &[u8], s: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..y.len() {
            for j in 0..y.len() {
                if y[i] == 1 && y[j] == 0 {
                    pairs += 1.0;
                    if s[i] > s[j] {
                        wins += 1.0;
                    } else if s[i] == s[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn closed_form_metrics() {
        // tp=2 fp=1 fn=2 tn=1
        let r = confusion_metrics(&[1, 1, 0, 1, 1, 0], &[1, 1, 1, 0, 0, 0]).unwrap();
        assert_eq!(r.confusion, Confusion { tp: 2, fp: 1, tn: 1, fn_: 2 });
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.recall, 0.5);
        assert!((r.f1 - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_predictor() {
        let y: Vec<u8> = (0..100).map(|i| u8::from(i < 10)).collect();
        let r = confusion_metrics(&y, &[0; 100]).unwrap();
        assert!((r.accuracy - 0.9).abs() < 1e-15);
        assert_eq!((r.recall, r.precision, r.f1), (0.0, 0.0, 0.0));
        let r = confusion_metrics(&y, &y).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
        assert!(confusion_metrics(&y, &[0; 3]).is_err());
    }

    #[test]
    fn trivial_auc_cases() {
        let y = [0, 0, 1, 1];
        assert_eq!(roc_auc(&y, &[0.1, 0.2, 0.8, 0.9]).unwrap().1, 1.0);
        assert_eq!(roc_auc(&y, &[0.5f64; 4]).unwrap().1, 0.5);
        assert!(roc_auc(&[1, 1], &[0.1, 0.2]).is_err());
        let (pts, _) = roc_auc(&y, &[0.3, 0.2, 0.8, 0.2]).unwrap();
        assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_oracle(
            data in prop::collection::vec((0u8..2, 0u32..20), 2..120)
        ) {
            let y: Vec<u8> = data.iter().map(|d| d.0).collect();
            let s: Vec<f64> = data.iter().map(|d| d.1 as f64 / 7.0).collect();
            prop_assume!(y.contains(&0) && y.contains(&1));
            let (pts, auc) = roc_auc(&y, &s).unwrap();
            prop_assert!((auc - pairwise_auc(&y, &s)).abs() < 1e-9);
            for w in pts.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            }
        }

        #[test]
        fn metrics_ignore_row_order(
            data in prop::collection::vec((0u8..2, 0u8..2), 1..60),
            rot in 0usize..60
        ) {
            let mut d2 = data.clone();
            let k = rot % d2.len();
            d2.rotate_left(k);
            let split = |d: &[(u8, u8)]| -> (Vec<u8>, Vec<u8>) { d.iter().copied().unzip() };
            let (a, b) = split(&data);
            let (c, e) = split(&d2);
            prop_assert_eq!(confusion_metrics(&a, &b).unwrap(), confusion_metrics(&c, &e).unwrap());
        }
    }
}
