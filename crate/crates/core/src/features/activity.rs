use std::collections::BTreeSet;

use crate::events::{AccountTimeline, EventType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActivityCounts {
    pub n_activity: u64,
    pub n_issues: u64,
    pub n_pull_requests: u64,
    pub n_repositories: u64,
    pub n_commits: u64,
    pub n_active_days: u64,
}

pub fn activity_counts(timeline: &AccountTimeline) -> ActivityCounts {
    let mut repos = BTreeSet::new();
    let mut days = BTreeSet::new();
    let mut c = ActivityCounts::default();
    for e in &timeline.events {
        c.n_activity += 1;
        if e.event_type.is_issue() {
            c.n_issues += 1;
        }
        if e.event_type.is_pull_request() {
            c.n_pull_requests += 1;
        }
        if e.event_type == EventType::Push {
            c.n_commits += e.commit_count;
        }
        repos.insert(e.repo_id.as_str());
        days.insert(e.occurred_at.date_naive());
    }
    c.n_repositories = repos.len() as u64;
    c.n_active_days = days.len() as u64;
    c
}
