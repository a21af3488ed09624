use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::parse_timestamp;
use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Half-open UTC interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        if end <= start {
            return Err(Error::Window(format!("end {end} is not after start {start}")));
        }
        Ok(Self { start, end })
    }

    /// Window of `days` whole days starting at midnight of `start`.
    pub fn from_days(start: NaiveDate, days: i64) -> Result<Self> {
        let start = start.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
        Self::new(start, start + chrono::Duration::days(days))
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration_seconds(&self) -> i64 {
        (self.end - self.start).num_seconds()
    }

    /// Number of (possibly partial) days covered, rounded up.
    pub fn n_days(&self) -> usize {
        let secs = self.duration_seconds();
        ((secs + SECONDS_PER_DAY - 1) / SECONDS_PER_DAY) as usize
    }

    /// Zero-based day bucket of `t` relative to the window start.
    pub fn day_index(&self, t: DateTime<Utc>) -> Option<usize> {
        self.contains(t)
            .then(|| ((t - self.start).num_seconds() / SECONDS_PER_DAY) as usize)
    }
}

fn parse_bound(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    parse_timestamp(s)
}

impl FromStr for Window {
    type Err = Error;

    /// Parses `start,end` where each bound is RFC 3339 or `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Window(format!("expected `start,end`, got {s:?}")))?;
        Self::new(parse_bound(a)?, parse_bound(b)?)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{}",
            super::format_timestamp(self.start),
            super::format_timestamp(self.end)
        )
    }
}
