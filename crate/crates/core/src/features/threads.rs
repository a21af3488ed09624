use std::collections::BTreeSet;

use crate::events::{AccountTimeline, EventStore};
use crate::stats::median;

/// Gaps in seconds between each of the account's thread events and the
/// event immediately before it in the same thread.
pub fn response_gaps(timeline: &AccountTimeline, store: &EventStore) -> Vec<f64> {
    let login = timeline.login.as_str();
    let mut gaps = Vec::new();
    for key in store.threads_of(login) {
        let thread = store.thread(key);
        for pair in thread.windows(2) {
            if pair[1].actor == login {
                let delta = (pair[1].occurred_at - pair[0].occurred_at).num_seconds();
                assert!(delta >= 0, "thread {key} not sorted");
                gaps.push(delta as f64);
            }
        }
    }
    gaps
}

/// Median response gap, `None` when the account never follows another event.
pub fn median_response_time(timeline: &AccountTimeline, store: &EventStore) -> Option<f64> {
    median(&response_gaps(timeline, store))
}

/// Distinct other actors sharing at least one thread with the account.
pub fn connection_accounts(timeline: &AccountTimeline, store: &EventStore) -> u64 {
    let login = timeline.login.as_str();
    let mut others = BTreeSet::new();
    for key in store.threads_of(login) {
        others.extend(
            store
                .thread(key)
                .iter()
                .map(|e| e.actor.as_str())
                .filter(|a| *a != login),
        );
    }
    others.len() as u64
}
