//! Labeled datasets: preprocessing, class balancing, splitting and the
//! annotation label store.

mod labels;
mod preprocess;
mod sampling;

pub use labels::{
    append_journal, read_ground_truth, read_journal, write_ground_truth, GroundTruth, JournalEntry, Label,
    LabelStatus, LabelStore,
};
pub use preprocess::{ColumnTransform, Preprocessing};
pub use sampling::{stratified_folds, stratified_split, undersample, undersample_indices};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::Window;
use crate::features::{FeatureRow, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelValue {
    Human = 0,
    Bot = 1,
}

impl LabelValue {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::Human),
            1 => Some(Self::Bot),
            _ => None,
        }
    }
}

impl FromStr for LabelValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "bot" => Ok(Self::Bot),
            "0" | "human" => Ok(Self::Human),
            other => Err(Error::format(format!("invalid label {other:?}"))),
        }
    }
}

/// Bot behaviour categories used when annotating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BotCategory {
    AutomaticCommenting,
    CICD,
    Workflow,
    Scanning,
}

impl BotCategory {
    pub const ALL: [BotCategory; 4] = [
        BotCategory::AutomaticCommenting,
        BotCategory::CICD,
        BotCategory::Workflow,
        BotCategory::Scanning,
    ];
}

impl fmt::Display for BotCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AutomaticCommenting => "AutomaticCommenting",
            Self::CICD => "CICD",
            Self::Workflow => "Workflow",
            Self::Scanning => "Scanning",
        })
    }
}

impl FromStr for BotCategory {
    type Err = Error;

    /// Accepts the display names in any case, ignoring spaces and punctuation.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        match key.as_str() {
            "automaticcommenting" | "automaticcommentingbot" => Ok(Self::AutomaticCommenting),
            "cicd" | "cicdbot" => Ok(Self::CICD),
            "workflow" | "workflowbot" => Ok(Self::Workflow),
            "scanning" | "scanningbot" => Ok(Self::Scanning),
            _ => Err(Error::format(format!("unknown bot category {s:?}"))),
        }
    }
}

/// Feature rows with optional labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub rows: Vec<FeatureRow>,
    pub window: Option<Window>,
}

/// Raw feature values of one row, `None` where missing.
pub type RawRow = [Option<f64>; N_FEATURES];

/// Labeled rows projected for modelling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub logins: Vec<String>,
    pub raw: Vec<RawRow>,
    pub y: Vec<u8>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            logins: indices.iter().map(|&i| self.logins[i].clone()).collect(),
            raw: indices.iter().map(|&i| self.raw[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let bots = self.y.iter().filter(|&&v| v == 1).count();
        (self.y.len() - bots, bots)
    }
}

impl LabeledDataset {
    pub fn new(rows: Vec<FeatureRow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !seen.insert(r.login.as_str()) {
                return Err(Error::format(format!("duplicate login {:?}", r.login)));
            }
            if r.category.is_some() && r.label != Some(LabelValue::Bot) {
                return Err(Error::format(format!(
                    "{}: bot category on a row not labeled bot",
                    r.login
                )));
            }
        }
        Ok(Self { rows, window: None })
    }

    /// (humans, bots, unlabeled).
    pub fn class_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in &self.rows {
            match r.label {
                Some(LabelValue::Human) => c.0 += 1,
                Some(LabelValue::Bot) => c.1 += 1,
                None => c.2 += 1,
            }
        }
        c
    }

    pub fn training_set(&self) -> TrainingSet {
        let mut t = TrainingSet::default();
        for r in self.rows.iter().filter(|r| r.label.is_some()) {
            t.logins.push(r.login.clone());
            t.raw.push(r.features.values());
            t.y.push(r.label.map_or(0, LabelValue::as_u8));
        }
        t
    }

    /// Sets labels from a login-keyed map; rows not in the map keep theirs.
    pub fn apply_labels(&mut self, labels: &BTreeMap<String, (LabelValue, Option<BotCategory>)>) {
        for r in &mut self.rows {
            if let Some(&(value, category)) = labels.get(&r.login) {
                r.label = Some(value);
                r.category = if value == LabelValue::Bot { category } else { None };
            }
        }
    }
}
