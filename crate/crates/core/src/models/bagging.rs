use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::check_xy;
use super::{check_dim, fit_base, BaseParams, Learner, ModelKind, Scorer, WeakClassifier};
use crate::dataset::{Preprocessing, RawRow};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    #[default]
    HardMajority,
}

/// How to build an ensemble: base learner, member count, decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingConfig {
    pub base: BaseParams,
    pub members: usize,
    pub bootstrap: bool,
    pub threshold: f64,
}

impl BaggingConfig {
    pub fn new(base: BaseParams) -> Self {
        Self {
            base,
            members: 11,
            bootstrap: true,
            threshold: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members == 0 {
            return Err(Error::invalid("an ensemble needs at least one member"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::invalid(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

impl Default for BaggingConfig {
    fn default() -> Self {
        Self::new(BaseParams::default_for(ModelKind::RandomForest))
    }
}

/// Fitted bagging ensemble with hard majority voting.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel<F> {
    pub base: BaseParams,
    pub members: Vec<WeakClassifier<F>>,
    pub seed: u64,
    pub member_seeds: Vec<u64>,
    pub bootstrap: bool,
    pub vote: Vote,
    pub threshold: f64,
    pub n_features: usize,
    /// Preprocessing fitted on the training rows; applied by [`Self::predict_raw`].
    pub preprocessing: Option<Preprocessing>,
}

/// Rows drawn with replacement for one member.
pub fn bootstrap_indices(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn has_both(y: &[u8], rows: &[usize]) -> bool {
    let bots = rows.iter().filter(|&&i| y[i] == 1).count();
    bots > 0 && bots < rows.len()
}

fn member_rows(y: &[u8], member_seed: u64, bootstrap: bool) -> (Vec<usize>, u64) {
    let n = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(member_seed);
    if !bootstrap {
        return ((0..n).collect(), rng.random());
    }
    let all: Vec<usize> = (0..n).collect();
    let both = has_both(y, &all);
    let mut rows = bootstrap_indices(&mut rng, n);
    // a single-class resample would leave some base learners undefined
    for _ in 0..MAX_REDRAWS {
        if !both || has_both(y, &rows) {
            break;
        }
        rows = bootstrap_indices(&mut rng, n);
    }
    (rows, rng.random())
}

pub fn fit_bagging<F: Scalar>(
    x: &Matrix<F>,
    y: &[u8],
    config: &BaggingConfig,
    seed: u64,
) -> Result<EnsembleModel<F>> {
    config.validate()?;
    check_xy(x, y)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let member_seeds: Vec<u64> = (0..config.members).map(|_| master.random()).collect();
    let members = member_seeds
        .par_iter()
        .map(|&s| {
            let (rows, fit_seed) = member_rows(y, s, config.bootstrap);
            let xs = x.select_rows(&rows);
            let ys: Vec<u8> = rows.iter().map(|&i| y[i]).collect();
            fit_base(&config.base, &xs, &ys, fit_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        base: config.base.clone(),
        members,
        seed,
        member_seeds,
        bootstrap: config.bootstrap,
        vote: Vote::HardMajority,
        threshold: config.threshold,
        n_features: x.cols(),
        preprocessing: None,
    })
}

impl<F: Scalar> Learner<F> for BaggingConfig {
    type Model = EnsembleModel<F>;

    fn fit(&self, x: &Matrix<F>, y: &[u8], seed: u64) -> Result<EnsembleModel<F>> {
        fit_bagging(x, y, self, seed)
    }
}

impl<F: Scalar> EnsembleModel<F> {
    pub fn kind(&self) -> ModelKind {
        self.base.kind()
    }

    /// Fraction of members voting bot.
    pub fn vote_fraction(&self, x: &[F]) -> Result<F> {
        check_dim(self.n_features, x.len())?;
        let votes = self.members.iter().filter(|m| m.vote(x)).count();
        Ok(F::from_usize_lossy(votes) / F::from_usize_lossy(self.members.len()))
    }

    /// Label (1 = bot) and vote fraction using the stored threshold or an override.
    pub fn predict_with(&self, x: &[F], threshold: Option<f64>) -> Result<(u8, F)> {
        let g = self.vote_fraction(x)?;
        let t = F::from_f64_lossy(threshold.unwrap_or(self.threshold));
        Ok((u8::from(g >= t), g))
    }

    pub fn predict(&self, x: &[F]) -> Result<(u8, F)> {
        self.predict_with(x, None)
    }

    /// Applies the stored preprocessing, then predicts.
    pub fn predict_raw(&self, row: &RawRow, threshold: Option<f64>) -> Result<(u8, F)> {
        let p = self
            .preprocessing
            .as_ref()
            .ok_or_else(|| Error::invalid("model carries no preprocessing"))?;
        self.predict_with(&p.transform_row::<F>(row), threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.file_view())?)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.file_view())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let file: ModelFile<F> = serde_json::from_reader(r)?;
        Self::from_file(file)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    fn file_view(&self) -> ModelFileRef<'_, F> {
        ModelFileRef {
            header: HeaderRef {
                format_version: MODEL_FORMAT_VERSION,
                scalar: scalar_name::<F>(),
                kind: self.kind(),
                seed: self.seed,
                member_seeds: &self.member_seeds,
                threshold: self.threshold,
                vote: self.vote,
                bootstrap: self.bootstrap,
                n_features: self.n_features,
                base_params: &self.base,
                preprocessing: self.preprocessing.as_ref(),
            },
            body: BodyRef {
                members: &self.members,
            },
        }
    }

    fn from_file(file: ModelFile<F>) -> Result<Self> {
        let h = file.header;
        if h.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "model format version {} (expected {MODEL_FORMAT_VERSION})",
                h.format_version
            )));
        }
        if h.scalar != scalar_name::<F>() {
            return Err(Error::Unsupported(format!(
                "model stores {} scalars, reader expects {}",
                h.scalar,
                scalar_name::<F>()
            )));
        }
        let members = file.body.members;
        if members.is_empty() || members.len() != h.member_seeds.len() {
            return Err(Error::format("model member count does not match its seeds"));
        }
        if members.iter().any(|m| m.kind() != h.kind) || h.base_params.kind() != h.kind {
            return Err(Error::format("model members do not match the declared kind"));
        }
        if let Some(p) = &h.preprocessing {
            check_dim(h.n_features, p.columns.len())?;
        }
        Ok(Self {
            base: h.base_params,
            members,
            seed: h.seed,
            member_seeds: h.member_seeds,
            bootstrap: h.bootstrap,
            vote: h.vote,
            threshold: h.threshold,
            n_features: h.n_features,
            preprocessing: h.preprocessing,
        })
    }
}

impl<F: Scalar> Scorer<F> for EnsembleModel<F> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classify(&self, x: &[F]) -> Result<(u8, F)> {
        self.predict(x)
    }
}

fn scalar_name<F: 'static>() -> String {
    std::any::type_name::<F>().to_string()
}

#[derive(Serialize)]
#[serde(bound = "F: Scalar")]
struct ModelFileRef<'a, F> {
    header: HeaderRef<'a>,
    body: BodyRef<'a, F>,
}

#[derive(Serialize)]
struct HeaderRef<'a> {
    format_version: u32,
    scalar: String,
    kind: ModelKind,
    seed: u64,
    member_seeds: &'a [u64],
    threshold: f64,
    vote: Vote,
    bootstrap: bool,
    n_features: usize,
    base_params: &'a BaseParams,
    preprocessing: Option<&'a Preprocessing>,
}

#[derive(Serialize)]
#[serde(bound = "F: Scalar")]
struct BodyRef<'a, F> {
    members: &'a [WeakClassifier<F>],
}

#[derive(Deserialize)]
#[serde(bound = "F: Scalar")]
struct ModelFile<F> {
    header: Header,
    body: Body<F>,
}

#[derive(Deserialize)]
struct Header {
    format_version: u32,
    scalar: String,
    kind: ModelKind,
    seed: u64,
    member_seeds: Vec<u64>,
    threshold: f64,
    vote: Vote,
    bootstrap: bool,
    n_features: usize,
    base_params: BaseParams,
    preprocessing: Option<Preprocessing>,
}

#[derive(Deserialize)]
#[serde(bound = "F: Scalar")]
struct Body<F> {
    members: Vec<WeakClassifier<F>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::TreeParams;

    fn toy(n: usize) -> (Matrix<f64>, Vec<u8>) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![i as f64, ((i * 7) % 5) as f64, (i % 2) as f64])
            .collect();
        let y = (0..n).map(|i| u8::from(i >= n / 2)).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn tree_config(members: usize) -> BaggingConfig {
        BaggingConfig {
            members,
            ..BaggingConfig::new(BaseParams::DecisionTree(TreeParams::default()))
        }
    }

    #[test]
    fn vote_fraction_counts_members() {
        let (x, y) = toy(40);
        let m = fit_bagging(&x, &y, &tree_config(7), 3).unwrap();
        assert_eq!(m.members.len(), 7);
        for r in x.iter_rows() {
            let g = m.vote_fraction(r).unwrap();
            let votes = m.members.iter().filter(|c| c.predict_proba(r) >= 0.5).count();
            assert_eq!(g, votes as f64 / 7.0);
            let (l, _) = m.predict(r).unwrap();
            assert_eq!(l, u8::from(g >= 0.5));
            assert_eq!(m.predict_with(r, Some(1.01)).unwrap().0, 0);
            assert_eq!(m.predict_with(r, Some(0.0)).unwrap().0, 1);
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (x, y) = toy(30);
        let a = fit_bagging(&x, &y, &BaggingConfig::default(), 11).unwrap();
        let b = fit_bagging(&x, &y, &BaggingConfig::default(), 11).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let back = EnsembleModel::<f64>::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        assert!(EnsembleModel::<f32>::from_json(&a.to_json().unwrap()).is_err());
    }

    #[test]
    fn member_seeds_follow_master_stream() {
        let (x, y) = toy(20);
        let m = fit_bagging(&x, &y, &tree_config(3), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let expected: Vec<u64> = (0..3).map(|_| rng.random()).collect();
        assert_eq!(m.member_seeds, expected);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let (x, y) = toy(20);
        let m = fit_bagging(&x, &y, &tree_config(3), 1).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let (x, y) = toy(20);
        assert!(fit_bagging(&x, &y, &tree_config(0), 1).is_err());
        let c = BaggingConfig { threshold: 2.0, ..tree_config(3) };
        assert!(fit_bagging(&x, &y, &c, 1).is_err());
    }

    #[test]
    fn tampered_file_rejected() {
        let (x, y) = toy(20);
        let m = fit_bagging(&x, &y, &tree_config(3), 1).unwrap();
        let json = m.to_json().unwrap().replace("\"format_version\":1", "\"format_version\":9");
        assert!(matches!(
            EnsembleModel::<f64>::from_json(&json),
            Err(Error::Unsupported(_))
        ));
    }
}
