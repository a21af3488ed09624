use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TrainingSet;
use crate::error::{Error, Result};

fn class_indices(y: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &v) in y.iter().enumerate() {
        out[(v != 0) as usize].push(i);
    }
    out
}

/// Row indices after randomly dropping majority-class rows down to the
/// minority count. Returned in ascending order.
pub fn undersample_indices(y: &[u8], seed: u64) -> Result<Vec<usize>> {
    let [mut neg, mut pos] = class_indices(y);
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::invalid("undersampling needs both classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = neg.len().min(pos.len());
    let majority = if neg.len() > pos.len() { &mut neg } else { &mut pos };
    if majority.len() > keep {
        majority.shuffle(&mut rng);
        majority.truncate(keep);
    }
    let mut all: Vec<usize> = neg.into_iter().chain(pos).collect();
    all.sort_unstable();
    Ok(all)
}

pub fn undersample(set: &TrainingSet, seed: u64) -> Result<TrainingSet> {
    Ok(set.subset(&undersample_indices(&set.y, seed)?))
}

/// Splits into (train, test) preserving class proportions.
pub fn stratified_split(
    set: &TrainingSet,
    test_fraction: f64,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut idx in class_indices(&set.y) {
        if idx.len() < 2 {
            return Err(Error::invalid("each class needs at least two rows to split"));
        }
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((set.subset(&train), set.subset(&test)))
}

/// Fold number in `0..k` for every row, stratified by class.
pub fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for mut idx in class_indices(y) {
        if idx.len() < k {
            return Err(Error::invalid(format!(
                "a class has {} rows, fewer than {k} folds; some fold would miss it",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}
