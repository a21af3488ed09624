//! Synthetic corpora with known ground truth: humans plus the four bot
//! archetypes, emitted in the same formats the ingestion pipeline reads.

mod corpus;
mod names;
mod tabular;

pub use corpus::{generate_corpus, Corpus};
pub use tabular::{overlapping_classes, separable_2d, INFORMATIVE_COUNTS};

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::BotCategory;
use crate::error::{Error, Result};
use crate::events::Window;

/// Minimum window length the generator accepts.
pub const MIN_WINDOW_DAYS: i64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Archetype {
    Human,
    AutomaticCommenting,
    CICD,
    Workflow,
    Scanning,
}

impl Archetype {
    pub const BOTS: [Archetype; 4] = [
        Archetype::AutomaticCommenting,
        Archetype::CICD,
        Archetype::Workflow,
        Archetype::Scanning,
    ];

    pub fn category(self) -> Option<BotCategory> {
        match self {
            Self::Human => None,
            Self::AutomaticCommenting => Some(BotCategory::AutomaticCommenting),
            Self::CICD => Some(BotCategory::CICD),
            Self::Workflow => Some(BotCategory::Workflow),
            Self::Scanning => Some(BotCategory::Scanning),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// Independent daily activity at the account's own rate.
    Diffuse,
    /// Reacts to thread-opening events in its repositories.
    Triggered,
    /// One scan report per week at a fixed weekday and hour.
    FixedWeekly,
}

/// Log-normal distribution given by its median and log-scale sigma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalSpec {
    pub median: f64,
    pub sigma: f64,
}

impl LogNormalSpec {
    pub const fn new(median: f64, sigma: f64) -> Self {
        Self { median, sigma }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.median > 0.0 && self.median.is_finite() && self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("{what}: log-normal needs median > 0 and sigma >= 0")));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        LogNormal::new(self.median.ln(), self.sigma)
            .map(|d| d.sample(rng))
            .unwrap_or(self.median)
    }
}

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u64,
    pub max: u64,
}

impl IntRange {
    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    /// Log-uniform draw: `ln(v + 1)` is uniform over the interval.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let (lo, hi) = ((self.min as f64).ln_1p(), (self.max as f64).ln_1p());
        let v = rng.random_range(lo..=hi).exp_m1().round() as u64;
        v.clamp(self.min, self.max)
    }
}

/// Generation parameters for one archetype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub archetype: Archetype,
    pub schedule: Schedule,
    /// Events per day, drawn once per account. For triggered and weekly
    /// schedules this is the rate of background pushes, issues and PRs.
    pub activity_rate: LogNormalSpec,
    /// Log-scale sigma of the per-account jitter applied to the event-type
    /// mix, the template probability and the response delay median.
    pub mix_jitter: f64,
    /// Multiplier on the daily rate for Saturdays and Sundays.
    pub weekend_factor: f64,
    /// Seconds between a trigger and the reaction.
    pub response_delay: LogNormalSpec,
    /// Probability of reacting to any one trigger.
    pub trigger_probability: f64,
    /// Comment templates; `{n}` thread number, `{id}` hex id, `{count}` small integer.
    pub comment_templates: Vec<String>,
    /// Chance a comment uses a template instead of free text; jittered per
    /// account like the event mix.
    pub template_probability: f64,
    /// Size range of each account's personal word list for free text.
    pub vocabulary_size: IntRange,
    /// Chance a templated comment gets one extra free word.
    pub template_variability: f64,
    /// Number of repositories the account works in.
    pub repositories: IntRange,
    pub followers: IntRange,
    pub following: IntRange,
    /// Chance the account has no followers and follows nobody.
    pub zero_follow_probability: f64,
    /// Chance lexicon terms appear in login, name and bio.
    pub lexicon_probability: f64,
    /// Chance the profile carries the platform's bot tag.
    pub bot_tag_probability: f64,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl BehaviorProfile {
    pub fn default_for(archetype: Archetype) -> Self {
        let bot = Self {
            archetype,
            schedule: Schedule::Triggered,
            activity_rate: LogNormalSpec::new(0.1, 1.2),
            mix_jitter: 0.5,
            weekend_factor: 1.0,
            response_delay: LogNormalSpec::new(5.0, 0.5),
            trigger_probability: 0.9,
            comment_templates: Vec::new(),
            template_probability: 1.0,
            vocabulary_size: IntRange::new(40, 120),
            template_variability: 0.1,
            repositories: IntRange::new(3, 8),
            followers: IntRange::new(0, 60),
            following: IntRange::new(0, 20),
            zero_follow_probability: 0.4,
            lexicon_probability: 0.9,
            bot_tag_probability: 0.5,
        };
        match archetype {
            Archetype::Human => Self {
                schedule: Schedule::Diffuse,
                activity_rate: LogNormalSpec::new(0.8, 0.6),
                mix_jitter: 0.8,
                weekend_factor: 0.35,
                response_delay: LogNormalSpec::new(3600.0 * 6.0, 1.0),
                trigger_probability: 0.0,
                comment_templates: strings(&["Thank you!", "LGTM", "+1"]),
                template_probability: 0.05,
                vocabulary_size: IntRange::new(20, 80),
                template_variability: 0.0,
                repositories: IntRange::new(1, 3),
                followers: IntRange::new(1, 400),
                following: IntRange::new(1, 150),
                zero_follow_probability: 0.0,
                lexicon_probability: 0.05,
                bot_tag_probability: 0.0,
                ..bot
            },
            Archetype::AutomaticCommenting => Self {
                comment_templates: strings(&[
                    "Thanks for opening this issue! A maintainer will review it soon. Please make sure you have read the contributing guide.",
                    "Thanks for opening this pull request! A maintainer will review it soon. Please make sure you have read the contributing guide.",
                ]),
                ..bot
            },
            Archetype::CICD => Self {
                response_delay: LogNormalSpec::new(90.0, 1.0),
                trigger_probability: 0.95,
                template_variability: 0.3,
                comment_templates: strings(&[
                    "Build {id} succeeded. All {count} checks passed.",
                    "Build {id} failed: {count} tests failing. See the logs for details.",
                    "Coverage report for {id}: {count} percent of changed lines covered.",
                ]),
                ..bot
            },
            Archetype::Workflow => Self {
                response_delay: LogNormalSpec::new(43_200.0, 1.2),
                trigger_probability: 0.4,
                template_probability: 0.7,
                comment_templates: strings(&[
                    "Labeled as needs-triage.",
                    "This issue has been marked as stale because it has not had recent activity.",
                    "Assigned to the maintainers team for review.",
                    "Closing as a duplicate of #{n}.",
                ]),
                repositories: IntRange::new(10, 25),
                ..bot
            },
            Archetype::Scanning => Self {
                schedule: Schedule::FixedWeekly,
                response_delay: LogNormalSpec::new(20.0, 0.3),
                comment_templates: strings(&[
                    "Weekly dependency scan: {count} vulnerable packages found.",
                    "Security scan report {id}: {count} findings.",
                ]),
                repositories: IntRange::new(1, 1),
                ..bot
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let who = format!("{:?} behavior", self.archetype);
        match (self.archetype, self.schedule) {
            (Archetype::Scanning, s) if s != Schedule::FixedWeekly => {
                return Err(Error::invalid(format!("{who}: scanning bots must be FixedWeekly")))
            }
            (Archetype::AutomaticCommenting | Archetype::CICD, s) if s != Schedule::Triggered => {
                return Err(Error::invalid(format!("{who}: must be Triggered")))
            }
            _ => {}
        }
        self.activity_rate.validate(&who)?;
        self.response_delay.validate(&who)?;
        for (name, p) in [
            ("trigger_probability", self.trigger_probability),
            ("template_probability", self.template_probability),
            ("template_variability", self.template_variability),
            ("zero_follow_probability", self.zero_follow_probability),
            ("lexicon_probability", self.lexicon_probability),
            ("bot_tag_probability", self.bot_tag_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{who}: {name} = {p} outside [0, 1]")));
            }
        }
        for (name, v) in [("weekend_factor", self.weekend_factor), ("mix_jitter", self.mix_jitter)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{who}: {name} must be >= 0")));
            }
        }
        for (name, r) in [
            ("repositories", self.repositories),
            ("vocabulary_size", self.vocabulary_size),
            ("followers", self.followers),
            ("following", self.following),
        ] {
            if r.min > r.max {
                return Err(Error::invalid(format!("{who}: {name} range is empty")));
            }
        }
        if self.vocabulary_size.min == 0 {
            return Err(Error::invalid(format!("{who}: vocabulary must be non-empty")));
        }
        if self.repositories.min == 0 {
            return Err(Error::invalid(format!("{who}: needs at least one repository")));
        }
        if self.template_probability > 0.0 && self.comment_templates.is_empty() {
            return Err(Error::invalid(format!("{who}: templates are used but none given")));
        }
        Ok(())
    }
}

/// Everything that determines a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub n_humans: usize,
    pub n_bots_per_archetype: usize,
    pub window: Window,
    pub seed: u64,
    /// Size of the shared repository pool; defaults to one per five humans (at least 4).
    pub n_repositories: Option<usize>,
    pub behaviors: Vec<BehaviorProfile>,
}

pub fn default_window() -> Window {
    let start = NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date");
    Window::from_days(start, 90).expect("valid window")
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_humans: 1000,
            n_bots_per_archetype: 20,
            window: default_window(),
            seed: 42,
            n_repositories: None,
            behaviors: std::iter::once(Archetype::Human)
                .chain(Archetype::BOTS)
                .map(BehaviorProfile::default_for)
                .collect(),
        }
    }
}

impl CorpusSpec {
    pub fn behavior(&self, a: Archetype) -> Option<&BehaviorProfile> {
        self.behaviors.iter().find(|b| b.archetype == a)
    }

    pub fn n_repositories(&self) -> usize {
        self.n_repositories.unwrap_or((self.n_humans / 5).max(4)).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let w = Window::new(self.window.start, self.window.end)?;
        let days = w.duration_seconds() / crate::events::SECONDS_PER_DAY;
        if days < MIN_WINDOW_DAYS {
            return Err(Error::Window(format!(
                "synthetic corpora need a window of at least {MIN_WINDOW_DAYS} days, got {days}"
            )));
        }
        for b in &self.behaviors {
            b.validate()?;
        }
        let need = std::iter::once((Archetype::Human, self.n_humans))
            .chain(Archetype::BOTS.map(|a| (a, self.n_bots_per_archetype)));
        for (a, n) in need {
            if n > 0 && self.behavior(a).is_none() {
                return Err(Error::invalid(format!("no behavior profile for {a:?}")));
            }
        }
        Ok(())
    }
}
