use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::quantile_sorted;

const CRITICAL_95: [f64; 12] = [
    3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507, 16.919, 18.307, 19.675, 21.026,
];

/// Upper 5% point of the chi-squared distribution for `df` in 1..=12.
pub fn chi_squared_critical_95(df: usize) -> Option<f64> {
    df.checked_sub(1).and_then(|i| CRITICAL_95.get(i).copied())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquared {
    pub statistic: f64,
    pub df: usize,
    /// Bin upper edges used for a numeric column (empty for binary columns).
    pub cut_points: Vec<f64>,
    /// Non-empty bins after merging.
    pub bins: usize,
}

/// Pearson chi-squared test of a feature column against the labels.
///
/// Numeric columns are cut at the `bins`-quantiles (duplicate cut points merge
/// their bins, `v <= cut` falls in the lower bin); binary columns are used as
/// they are. Empty bins are dropped so no expected count is zero.
pub fn chi_squared(column: &[f64], labels: &[u8], binary: bool, bins: usize) -> Result<ChiSquared> {
    if column.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: column.len(),
        });
    }
    let bots = labels.iter().filter(|&&l| l == 1).count();
    if bots == 0 || bots == labels.len() {
        return Err(Error::invalid("chi-squared needs both label values"));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("chi-squared column has non-finite values"));
    }

    let mut cuts = Vec::new();
    let bin_of: Box<dyn Fn(f64) -> usize> = if binary {
        Box::new(|v: f64| usize::from(v > 0.5))
    } else {
        let mut sorted = column.to_vec();
        sorted.sort_by(f64::total_cmp);
        for i in 1..bins.max(1) {
            let q = quantile_sorted(&sorted, i as f64 / bins as f64).unwrap_or(0.0);
            if cuts.last() != Some(&q) {
                cuts.push(q);
            }
        }
        let c = cuts.clone();
        Box::new(move |v: f64| c.iter().filter(|&&cut| v > cut).count())
    };
    let n_bins = if binary { 2 } else { cuts.len() + 1 };
    let mut table = vec![[0u64; 2]; n_bins];
    for (&v, &l) in column.iter().zip(labels) {
        table[bin_of(v)][usize::from(l == 1)] += 1;
    }
    table.retain(|row| row[0] + row[1] > 0);
    if table.len() < 2 {
        return Ok(ChiSquared {
            statistic: 0.0,
            df: 0,
            cut_points: cuts,
            bins: table.len(),
        });
    }
    let n = labels.len() as f64;
    let col_tot = [(labels.len() - bots) as f64, bots as f64];
    let mut stat = 0.0;
    for row in &table {
        let row_tot = (row[0] + row[1]) as f64;
        for k in 0..2 {
            let e = row_tot * col_tot[k] / n;
            let d = row[k] as f64 - e;
            stat += d * d / e;
        }
    }
    Ok(ChiSquared {
        statistic: stat,
        df: table.len() - 1,
        cut_points: cuts,
        bins: table.len(),
    })
}
