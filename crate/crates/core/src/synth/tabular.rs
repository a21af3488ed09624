//! Small feature-space datasets for classifier and class-balance checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{RawRow, TrainingSet};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FEATURE_KINDS, N_FEATURES};
use crate::matrix::Matrix;

/// `n` points in the unit square labeled 1 when `x0 + x1 > 1`. Points
/// closer than `margin` (along either axis sum) to the boundary are redrawn.
pub fn separable_2d(n: usize, margin: f64, seed: u64) -> Result<(Matrix<f64>, Vec<u8>)> {
    if !(0.0..0.5).contains(&margin) {
        return Err(Error::invalid(format!("margin {margin} outside [0, 0.5)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    while rows.len() < n {
        let p: [f64; 2] = [rng.random(), rng.random()];
        let s = p[0] + p[1] - 1.0;
        if s.abs() <= margin {
            continue;
        }
        rows.push(p);
        y.push(u8::from(s > 0.0));
    }
    Ok((Matrix::from_rows(&rows)?, y))
}

/// Number of leading count columns that separate the classes.
pub const INFORMATIVE_COUNTS: usize = 4;

/// Two overlapping classes in the 17-feature space: `n` rows, a
/// `bot_fraction` of them bots. Count columns are log-normal; on the first
/// [`INFORMATIVE_COUNTS`] of them the bots' log-mean is moved by `shift`.
/// Binary and ratio columns are identically distributed noise.
pub fn overlapping_classes(n: usize, bot_fraction: f64, shift: f64, seed: u64) -> Result<TrainingSet> {
    if !(0.0..=1.0).contains(&bot_fraction) || !shift.is_finite() {
        return Err(Error::invalid("bot fraction must be in [0, 1] and shift finite"));
    }
    let n_bots = (n as f64 * bot_fraction).round() as usize;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = TrainingSet::default();
    for i in 0..n {
        let bot = i >= n - n_bots;
        let mut row: RawRow = [None; N_FEATURES];
        let mut counts = 0;
        for (j, kind) in FEATURE_KINDS.iter().enumerate() {
            row[j] = Some(match kind {
                FeatureKind::Binary => f64::from(u8::from(rng.random_bool(0.2))),
                FeatureKind::Ratio => rng.random(),
                FeatureKind::Count => {
                    let mu = if bot && counts < INFORMATIVE_COUNTS { shift } else { 0.0 };
                    counts += 1;
                    (mu + normal.sample(&mut rng)).exp()
                }
            });
        }
        set.logins.push(format!("row-{i:05}"));
        set.raw.push(row);
        set.y.push(u8::from(bot));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_labels_follow_the_line() {
        let (x, y) = separable_2d(200, 0.05, 1).unwrap();
        assert_eq!(x.rows(), 200);
        for (r, &l) in x.iter_rows().zip(&y) {
            let s = r[0] + r[1] - 1.0;
            assert!(s.abs() > 0.05);
            assert_eq!(l, u8::from(s > 0.0));
        }
        assert!(y.iter().any(|&l| l == 1) && y.iter().any(|&l| l == 0));
        assert!(separable_2d(10, 0.5, 1).is_err());
    }

    #[test]
    fn overlapping_has_requested_balance() {
        let set = overlapping_classes(500, 0.1, 1.0, 2).unwrap();
        assert_eq!(set.class_counts(), (450, 50));
        assert!(set.raw.iter().flatten().all(|v| v.is_some_and(|x| x.is_finite() && x >= 0.0)));
        assert_eq!(overlapping_classes(500, 0.1, 1.0, 2).unwrap(), set);
    }
}
