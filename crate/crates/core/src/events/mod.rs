//! Platform event records, account profiles and per-account timelines.
//!
//! Everything downstream (feature extraction, labeling evidence) reads
//! the structures built here: [`parse_archive`] turns GH-Archive style
//! line-delimited JSON into [`Event`]s, [`index_by_actor`] groups them
//! into time-ordered [`AccountTimeline`]s, and [`EventStore`] indexes
//! the same events by discussion thread.

mod archive;
mod profile;
mod store;
mod timeline;
mod window;

pub use archive::{open_archive, parse_archive, write_archive, ParsedArchive};
pub use profile::{read_profiles, write_profiles, AccountProfile, AccountTag};
pub use store::{EventStore, ThreadEntry};
pub use timeline::{
    filter_active, index_by_actor, sample_accounts, Account, AccountTimeline, TimelineSet,
};
pub use window::{Window, SECONDS_PER_DAY};

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventType {
    IssueOpen,
    IssueComment,
    PullRequestOpen,
    PullRequestComment,
    PullRequestMerge,
    Push,
    Create,
    Other,
}

impl EventType {
    /// Events that belong to an issue or pull-request thread.
    pub fn is_thread_scoped(self) -> bool {
        matches!(
            self,
            EventType::IssueOpen
                | EventType::IssueComment
                | EventType::PullRequestOpen
                | EventType::PullRequestComment
                | EventType::PullRequestMerge
        )
    }

    pub fn is_issue(self) -> bool {
        matches!(self, EventType::IssueOpen | EventType::IssueComment)
    }

    pub fn is_pull_request(self) -> bool {
        matches!(
            self,
            EventType::PullRequestOpen | EventType::PullRequestComment | EventType::PullRequestMerge
        )
    }

    pub fn opens_thread(self) -> bool {
        matches!(self, EventType::IssueOpen | EventType::PullRequestOpen)
    }
}

/// One platform activity record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub actor_login: String,
    pub repo_id: String,
    pub event_type: EventType,
    pub occurred_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thread_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment_text: Option<String>,
    #[serde(default)]
    pub commit_count: u64,
}

/// Key shared by every event of one issue or pull request.
pub fn thread_key(repo_id: &str, number: u64) -> String {
    format!("{repo_id}#{number}")
}

impl Event {
    /// Builds an event, enforcing the thread-key and commit-count rules.
    pub fn new(
        actor_login: impl Into<String>,
        repo_id: impl Into<String>,
        event_type: EventType,
        occurred_at: DateTime<Utc>,
        thread_number: Option<u64>,
        comment_text: Option<String>,
        commit_count: u64,
    ) -> Result<Self> {
        let actor_login = actor_login.into();
        let repo_id = repo_id.into();
        if actor_login.is_empty() {
            return Err(Error::invalid("empty actor login"));
        }
        let thread_key = match (event_type.is_thread_scoped(), thread_number) {
            (true, Some(n)) => Some(thread_key(&repo_id, n)),
            (true, None) => {
                return Err(Error::invalid(format!(
                    "{event_type:?} event without a thread number"
                )))
            }
            (false, _) => None,
        };
        if commit_count > 0 && event_type != EventType::Push {
            return Err(Error::invalid("commit_count on a non-push event"));
        }
        Ok(Self {
            actor_login,
            repo_id,
            event_type,
            occurred_at: truncate_to_second(occurred_at),
            thread_key,
            comment_text,
            commit_count,
        })
    }

    /// Issue/PR number encoded in the thread key.
    pub fn thread_number(&self) -> Option<u64> {
        let key = self.thread_key.as_deref()?;
        key.rsplit_once('#')?.1.parse().ok()
    }
}

pub(crate) fn truncate_to_second(t: DateTime<Utc>) -> DateTime<Utc> {
    t.with_nanosecond(0).unwrap_or(t)
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| truncate_to_second(t.with_timezone(&Utc)))
        .map_err(|_| Error::Timestamp(s.to_string()))
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}
