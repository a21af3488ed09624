use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AccountProfile, Event, EventStore, Window};
use crate::error::{Error, Result};

/// Time-ordered events of one actor inside an observation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountTimeline {
    pub login: String,
    pub events: Vec<Event>,
    pub window: Window,
}

impl AccountTimeline {
    pub fn empty(login: impl Into<String>, window: Window) -> Self {
        Self {
            login: login.into(),
            events: Vec::new(),
            window,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Appends events, keeping the time order (stable for ties).
    pub fn extend(&mut self, events: impl IntoIterator<Item = Event>) {
        self.events.extend(
            events
                .into_iter()
                .filter(|e| e.actor_login == self.login && self.window.contains(e.occurred_at)),
        );
        self.events.sort_by_key(|e| e.occurred_at);
    }
}

/// An actor's profile together with its timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Account {
    pub profile: AccountProfile,
    pub timeline: AccountTimeline,
}

/// Groups in-window events by actor. Actors without a profile get a bare one.
pub fn index_by_actor(
    events: &[Event],
    profiles: &BTreeMap<String, AccountProfile>,
    window: &Window,
) -> BTreeMap<String, Account> {
    let mut out: BTreeMap<String, Account> = BTreeMap::new();
    for e in events.iter().filter(|e| window.contains(e.occurred_at)) {
        out.entry(e.actor_login.clone())
            .or_insert_with(|| Account {
                profile: profiles
                    .get(&e.actor_login)
                    .cloned()
                    .unwrap_or_else(|| AccountProfile::bare(e.actor_login.clone())),
                timeline: AccountTimeline::empty(e.actor_login.clone(), *window),
            })
            .timeline
            .events
            .push(e.clone());
    }
    for account in out.values_mut() {
        account.timeline.events.sort_by_key(|e| e.occurred_at);
    }
    out
}

/// Keeps accounts with strictly more than `min_events` events.
pub fn filter_active(
    accounts: BTreeMap<String, Account>,
    min_events: usize,
) -> BTreeMap<String, Account> {
    accounts
        .into_iter()
        .filter(|(_, a)| a.timeline.len() > min_events)
        .collect()
}

/// Mixes "active" accounts (more than `active_threshold` events, always kept)
/// with a seeded Bernoulli sample of the remaining accounts.
pub fn sample_accounts(
    accounts: BTreeMap<String, Account>,
    active_threshold: usize,
    rate: f64,
    seed: u64,
) -> Result<BTreeMap<String, Account>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("sample rate {rate} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(accounts
        .into_iter()
        .filter(|(_, a)| {
            let draw: f64 = rng.random();
            a.timeline.len() > active_threshold || draw < rate
        })
        .collect())
}

/// On-disk result of ingestion: every in-window event (the thread store
/// needs other actors' events too) plus the profiles of retained accounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineSet {
    pub format_version: u32,
    pub window: Window,
    pub accounts: Vec<AccountProfile>,
    pub events: Vec<Event>,
}

impl TimelineSet {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn new(window: Window, accounts: &BTreeMap<String, Account>, mut events: Vec<Event>) -> Self {
        events.retain(|e| window.contains(e.occurred_at));
        events.sort_by_key(|e| e.occurred_at);
        Self {
            format_version: Self::FORMAT_VERSION,
            window,
            accounts: accounts.values().map(|a| a.profile.clone()).collect(),
            events,
        }
    }

    pub fn read<R: Read>(mut reader: R) -> Result<Option<Self>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        if text.trim().is_empty() {
            return Ok(None);
        }
        let set: Self = serde_json::from_str(&text)?;
        if set.format_version != Self::FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported timelines format version {}",
                set.format_version
            )));
        }
        Ok(Some(set))
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer(&mut writer, self)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn store(&self) -> EventStore {
        EventStore::build(&self.events)
    }

    /// Rebuilds the retained accounts' timelines, in login order.
    pub fn accounts(&self) -> BTreeMap<String, Account> {
        let profiles: BTreeMap<String, AccountProfile> = self
            .accounts
            .iter()
            .map(|p| (p.login.clone(), p.clone()))
            .collect();
        let mut indexed = index_by_actor(&self.events, &profiles, &self.window);
        indexed.retain(|login, _| profiles.contains_key(login));
        for (login, p) in &profiles {
            indexed.entry(login.clone()).or_insert_with(|| Account {
                profile: p.clone(),
                timeline: AccountTimeline::empty(login.clone(), self.window),
            });
        }
        indexed
    }
}
