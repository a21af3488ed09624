//! The 17-dimensional behavioral feature vector of an account.
//!
//! Profile flags, activity counts, response time, thread network size,
//! comment similarity and activity periodicity, computed from an
//! [`AccountTimeline`], its [`AccountProfile`] and the shared [`EventStore`].

mod activity;
mod lexicon;
mod periodicity;
mod similarity;
mod table;
mod threads;

pub use activity::{activity_counts, ActivityCounts};
pub use lexicon::{profile_flag, tag_flag, SubstringLexicon, DEFAULT_TERMS};
pub use periodicity::{autocorrelation, daily_counts, periodicity, MAX_LAG_DAYS, MIN_SPAN_DAYS};
pub use similarity::{
    comment_similarity, recent_comments, tokenize, SimilarityAlgorithm, MAX_COMMENTS,
};
pub use table::{read_feature_table, write_feature_table, FeatureRow, FEATURE_CSV_HEADER};
pub use threads::{connection_accounts, median_response_time, response_gaps};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::events::{Account, AccountProfile, AccountTimeline, EventStore};

pub const N_FEATURES: usize = 17;

/// Column names in the fixed export order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "f_login",
    "f_name",
    "f_bio",
    "f_email",
    "f_tag",
    "n_following",
    "n_followers",
    "n_activity",
    "n_issues",
    "n_pull_requests",
    "n_repositories",
    "n_commits",
    "n_active_days",
    "median_response_time",
    "n_connection_accounts",
    "comment_similarity",
    "periodicity",
];

pub const TAG_FEATURE: usize = 4;

/// How a feature column is encoded before modelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// 0/1 flag, left untouched.
    Binary,
    /// Non-negative, heavy tailed: `log1p` then standardized.
    Count,
    /// Bounded real: standardized only.
    Ratio,
}

pub const FEATURE_KINDS: [FeatureKind; N_FEATURES] = {
    use FeatureKind::*;
    [
        Binary, Binary, Binary, Binary, Binary, Count, Count, Count, Count, Count, Count, Count,
        Count, Count, Count, Ratio, Ratio,
    ]
};

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub f_login: u8,
    pub f_name: u8,
    pub f_bio: u8,
    pub f_email: u8,
    pub f_tag: u8,
    pub n_following: u64,
    pub n_followers: u64,
    pub n_activity: u64,
    pub n_issues: u64,
    pub n_pull_requests: u64,
    pub n_repositories: u64,
    pub n_commits: u64,
    pub n_active_days: u64,
    /// Seconds; `None` when the account never responds in a thread.
    pub median_response_time: Option<f64>,
    pub n_connection_accounts: u64,
    /// `None` with fewer than two comments.
    pub comment_similarity: Option<f64>,
    pub periodicity: f64,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order; `None` marks a missing value.
    pub fn values(&self) -> [Option<f64>; N_FEATURES] {
        [
            Some(self.f_login as f64),
            Some(self.f_name as f64),
            Some(self.f_bio as f64),
            Some(self.f_email as f64),
            Some(self.f_tag as f64),
            Some(self.n_following as f64),
            Some(self.n_followers as f64),
            Some(self.n_activity as f64),
            Some(self.n_issues as f64),
            Some(self.n_pull_requests as f64),
            Some(self.n_repositories as f64),
            Some(self.n_commits as f64),
            Some(self.n_active_days as f64),
            self.median_response_time,
            Some(self.n_connection_accounts as f64),
            self.comment_similarity,
            Some(self.periodicity),
        ]
    }
}

/// Extraction settings.
#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub lexicon: SubstringLexicon,
    pub similarity: SimilarityAlgorithm,
}

pub fn extract(
    timeline: &AccountTimeline,
    profile: &AccountProfile,
    store: &EventStore,
    options: &ExtractOptions,
) -> FeatureVector {
    let lex = &options.lexicon;
    let counts = activity_counts(timeline);
    FeatureVector {
        f_login: profile_flag(Some(&profile.login), lex),
        f_name: profile_flag(profile.name.as_deref(), lex),
        f_bio: profile_flag(profile.bio.as_deref(), lex),
        f_email: profile_flag(profile.email.as_deref(), lex),
        f_tag: tag_flag(profile),
        n_following: profile.following,
        n_followers: profile.followers,
        n_activity: counts.n_activity,
        n_issues: counts.n_issues,
        n_pull_requests: counts.n_pull_requests,
        n_repositories: counts.n_repositories,
        n_commits: counts.n_commits,
        n_active_days: counts.n_active_days,
        median_response_time: median_response_time(timeline, store),
        n_connection_accounts: connection_accounts(timeline, store),
        comment_similarity: comment_similarity(&recent_comments(timeline), options.similarity),
        periodicity: periodicity(timeline),
    }
}

/// Extracts every account in parallel; output follows the map's login order.
pub fn extract_all(
    accounts: &BTreeMap<String, Account>,
    store: &EventStore,
    options: &ExtractOptions,
) -> Vec<FeatureRow> {
    let accounts: Vec<&Account> = accounts.values().collect();
    accounts
        .par_iter()
        .map(|a| FeatureRow {
            login: a.profile.login.clone(),
            features: extract(&a.timeline, &a.profile, store, options),
            label: None,
            category: None,
        })
        .collect()
}
