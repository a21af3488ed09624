use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{evaluate_scores, MetricsReport};
use crate::dataset::{stratified_folds, undersample_indices, Preprocessing, TrainingSet};
use crate::error::{Error, Result};
use crate::models::{Learner, Scorer};
use crate::scalar::Scalar;
use crate::stats::{mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CvOptions {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Balance each training part by undersampling the majority class.
    pub undersample: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 5,
            repeats: 5,
            seed: 0,
            undersample: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Self {
        Self {
            mean: mean(values).unwrap_or(0.0),
            sd: sample_std(values).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CvSummary {
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    pub auc: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldOutcome {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub options: CvOptions,
    pub folds: Vec<FoldOutcome>,
    pub summary: CvSummary,
    /// FNV-1a hash of each repeat's fold assignment.
    pub partition_hashes: Vec<u64>,
}

/// Stream-splitting seed derivation (splitmix64 finalizer over combined inputs).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn partition_hash(folds: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &f in folds {
        for b in (f as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

const SALT_FOLDS: u64 = 1;
const SALT_UNDERSAMPLE: u64 = 2;
const SALT_FIT: u64 = 3;

/// Repeated stratified k-fold cross-validation.
///
/// Preprocessing is fitted on each (undersampled) training part and applied to
/// the held-out fold, which is never resampled.
pub fn cross_validate<F, L>(set: &TrainingSet, learner: &L, opts: &CvOptions) -> Result<CvReport>
where
    F: Scalar,
    L: Learner<F>,
{
    if opts.repeats == 0 {
        return Err(Error::invalid("need at least one repeat"));
    }
    let assignments = (0..opts.repeats)
        .map(|r| stratified_folds(&set.y, opts.folds, derive_seed(opts.seed, SALT_FOLDS, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..opts.repeats)
        .flat_map(|r| (0..opts.folds).map(move |f| (r, f)))
        .collect();
    let folds = jobs
        .par_iter()
        .map(|&(r, f)| {
            let job = (r * opts.folds + f) as u64;
            let assign = &assignments[r];
            let mut train: Vec<usize> = (0..set.len()).filter(|&i| assign[i] != f).collect();
            let test: Vec<usize> = (0..set.len()).filter(|&i| assign[i] == f).collect();
            if opts.undersample {
                let y: Vec<u8> = train.iter().map(|&i| set.y[i]).collect();
                let keep = undersample_indices(&y, derive_seed(opts.seed, SALT_UNDERSAMPLE, job))?;
                train = keep.into_iter().map(|k| train[k]).collect();
            }
            let train_set = set.subset(&train);
            let test_set = set.subset(&test);
            let prep = Preprocessing::fit(&train_set.raw)?;
            let model = learner.fit(
                &prep.transform::<F>(&train_set.raw),
                &train_set.y,
                derive_seed(opts.seed, SALT_FIT, job),
            )?;
            let (labels, scores) = model.score_rows(&prep.transform::<F>(&test_set.raw))?;
            let mut report = evaluate_scores(&test_set.y, &labels, &scores)?;
            report.roc.clear();
            Ok(FoldOutcome {
                repeat: r,
                fold: f,
                n_train: train.len(),
                n_test: test.len(),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pick = |g: fn(&MetricsReport) -> f64| -> MetricSummary {
        let v: Vec<f64> = folds.iter().map(|o| g(&o.report)).collect();
        MetricSummary::of(&v)
    };
    let summary = CvSummary {
        accuracy: pick(|r| r.accuracy),
        precision: pick(|r| r.precision),
        recall: pick(|r| r.recall),
        f1: pick(|r| r.f1),
        auc: pick(|r| r.auc.unwrap_or(0.5)),
    };
    Ok(CvReport {
        options: *opts,
        partition_hashes: assignments.iter().map(|a| partition_hash(a)).collect(),
        folds,
        summary,
    })
}
