use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};

use super::Event;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadEntry {
    pub occurred_at: DateTime<Utc>,
    pub actor: String,
}

/// Read-only index of thread-scoped events, keyed by thread.
///
/// Entries within a thread are ordered by time, ties kept in input order.
#[derive(Debug, Clone, Default)]
pub struct EventStore {
    threads: BTreeMap<String, Vec<ThreadEntry>>,
    by_actor: BTreeMap<String, BTreeSet<String>>,
}

impl EventStore {
    pub fn build(events: &[Event]) -> Self {
        let mut threads: BTreeMap<String, Vec<ThreadEntry>> = BTreeMap::new();
        let mut by_actor: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in events {
            if let Some(key) = &e.thread_key {
                threads.entry(key.clone()).or_default().push(ThreadEntry {
                    occurred_at: e.occurred_at,
                    actor: e.actor_login.clone(),
                });
                by_actor
                    .entry(e.actor_login.clone())
                    .or_default()
                    .insert(key.clone());
            }
        }
        for entries in threads.values_mut() {
            entries.sort_by_key(|t| t.occurred_at);
        }
        Self { threads, by_actor }
    }

    pub fn thread(&self, key: &str) -> &[ThreadEntry] {
        self.threads.get(key).map_or(&[], Vec::as_slice)
    }

    /// Threads in which `login` has at least one event.
    pub fn threads_of<'a>(&'a self, login: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.by_actor
            .get(login)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn n_threads(&self) -> usize {
        self.threads.len()
    }
}
