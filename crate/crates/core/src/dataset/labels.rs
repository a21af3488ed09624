use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{BotCategory, LabelValue};
use crate::error::{Error, Result};
use crate::events::{format_timestamp, parse_timestamp};
use crate::features::FeatureRow;

/// One annotator's decision about one account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub value: LabelValue,
    pub category: Option<BotCategory>,
    pub annotator: String,
    pub decided_at: DateTime<Utc>,
}

impl Label {
    pub fn new(
        value: LabelValue,
        category: Option<BotCategory>,
        annotator: impl Into<String>,
        decided_at: DateTime<Utc>,
    ) -> Result<Self> {
        let annotator = annotator.into();
        if annotator.trim().is_empty() {
            return Err(Error::invalid("annotator must not be empty"));
        }
        if category.is_some() && value != LabelValue::Bot {
            return Err(Error::invalid("a bot category requires a bot label"));
        }
        Ok(Self {
            value,
            category,
            annotator,
            decided_at,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelStatus {
    Unlabeled,
    Pending,
    Conflict,
    Confirmed,
}

impl LabelStatus {
    pub const ALL: [LabelStatus; 4] = [
        LabelStatus::Unlabeled,
        LabelStatus::Pending,
        LabelStatus::Conflict,
        LabelStatus::Confirmed,
    ];
}

impl fmt::Display for LabelStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Unlabeled => "unlabeled",
            Self::Pending => "pending",
            Self::Conflict => "conflict",
            Self::Confirmed => "confirmed",
        })
    }
}

impl FromStr for LabelStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown status {s:?}")))
    }
}

/// Outcome of the labels collected for one account.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub status: LabelStatus,
    pub value: Option<LabelValue>,
    pub category: Option<BotCategory>,
}

fn resolve(labels: &[Label]) -> Resolution {
    let status_only = |status| Resolution {
        status,
        value: None,
        category: None,
    };
    match labels.len() {
        0 => return status_only(LabelStatus::Unlabeled),
        1 => return status_only(LabelStatus::Pending),
        _ => {}
    }
    let bots = labels.iter().filter(|l| l.value == LabelValue::Bot).count();
    let humans = labels.len() - bots;
    let value = match bots.cmp(&humans) {
        std::cmp::Ordering::Greater => LabelValue::Bot,
        std::cmp::Ordering::Less => LabelValue::Human,
        std::cmp::Ordering::Equal => return status_only(LabelStatus::Conflict),
    };
    // most frequent category among the winning labels, earliest on ties
    let mut tally: Vec<(BotCategory, usize)> = Vec::new();
    for c in labels.iter().filter(|l| l.value == value).filter_map(|l| l.category) {
        match tally.iter_mut().find(|(k, _)| *k == c) {
            Some((_, n)) => *n += 1,
            None => tally.push((c, 1)),
        }
    }
    let best = tally.iter().map(|(_, n)| *n).max();
    let category = tally
        .iter()
        .find(|(_, n)| Some(*n) == best)
        .map(|(c, _)| *c);
    Resolution {
        status: LabelStatus::Confirmed,
        value: Some(value),
        category,
    }
}

/// Single-writer store of annotator labels for a fixed set of accounts.
///
/// An account is confirmed once a strict majority of at least two
/// annotators agree; a tie is a conflict awaiting another label. Relabeling
/// by the same annotator replaces their earlier label, but may not move a
/// confirmed account back to conflict.
#[derive(Debug, Clone, Default)]
pub struct LabelStore {
    labels: BTreeMap<String, Vec<Label>>,
}

impl LabelStore {
    pub fn new<I, S>(logins: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            labels: logins.into_iter().map(|l| (l.into(), Vec::new())).collect(),
        }
    }

    pub fn contains(&self, login: &str) -> bool {
        self.labels.contains_key(login)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels_of(&self, login: &str) -> Option<&[Label]> {
        self.labels.get(login).map(Vec::as_slice)
    }

    pub fn record_label(&mut self, login: &str, label: Label) -> Result<Resolution> {
        let labels = self
            .labels
            .get_mut(login)
            .ok_or_else(|| Error::NotFound(login.to_string()))?;
        let before = resolve(labels);
        let mut next = labels.clone();
        match next.iter_mut().find(|l| l.annotator == label.annotator) {
            Some(prev) => *prev = label,
            None => next.push(label),
        }
        let after = resolve(&next);
        if before.status == LabelStatus::Confirmed && after.status != LabelStatus::Confirmed {
            return Err(Error::LabelConflict(format!(
                "{login} is confirmed; this relabel would reopen it"
            )));
        }
        *labels = next;
        Ok(after)
    }

    pub fn resolution(&self, login: &str) -> Option<Resolution> {
        self.labels.get(login).map(|l| resolve(l))
    }

    pub fn status(&self, login: &str) -> Option<LabelStatus> {
        self.resolution(login).map(|r| r.status)
    }

    /// Logins with the given status, in login order.
    pub fn with_status(&self, status: LabelStatus) -> impl Iterator<Item = &str> + '_ {
        self.labels
            .iter()
            .filter(move |(_, l)| resolve(l).status == status)
            .map(|(k, _)| k.as_str())
    }

    pub fn progress(&self) -> BTreeMap<LabelStatus, usize> {
        let mut out: BTreeMap<LabelStatus, usize> =
            LabelStatus::ALL.iter().map(|s| (*s, 0)).collect();
        for l in self.labels.values() {
            *out.entry(resolve(l).status).or_default() += 1;
        }
        out
    }

    /// Confirmed rows only, with the resolved label filled in.
    pub fn export_rows(&self, rows: &[FeatureRow]) -> Vec<FeatureRow> {
        rows.iter()
            .filter_map(|r| {
                let res = self.resolution(&r.login)?;
                (res.status == LabelStatus::Confirmed).then(|| FeatureRow {
                    label: res.value,
                    category: res.category,
                    ..r.clone()
                })
            })
            .collect()
    }

    /// Replays journal entries in order; unknown logins are reported as errors.
    pub fn replay(&mut self, entries: impl IntoIterator<Item = JournalEntry>) -> Result<()> {
        for e in entries {
            self.record_label(&e.login, e.label)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalEntry {
    pub login: String,
    pub label: Label,
}

pub const JOURNAL_HEADER: [&str; 5] = ["login", "value", "category", "annotator", "decided_at"];

/// Appends entries to a `login,value,category,annotator,decided_at` journal.
/// Writes the header first when `with_header` is set (a new file).
pub fn append_journal<W: Write>(writer: W, entries: &[JournalEntry], with_header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if with_header {
        w.write_record(JOURNAL_HEADER)?;
    }
    for e in entries {
        w.write_record([
            e.login.clone(),
            e.label.value.as_u8().to_string(),
            e.label.category.map(|c| c.to_string()).unwrap_or_default(),
            e.label.annotator.clone(),
            format_timestamp(e.label.decided_at),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_journal<R: Read>(reader: R) -> Result<Vec<JournalEntry>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(JOURNAL_HEADER.iter().copied()) {
        return Err(Error::format("label journal header mismatch"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let category = match rec.get(2).unwrap_or("") {
            "" => None,
            s => Some(s.parse()?),
        };
        let label = Label::new(
            rec.get(1).unwrap_or("").parse()?,
            category,
            rec.get(3).unwrap_or(""),
            parse_timestamp(rec.get(4).unwrap_or(""))?,
        )?;
        out.push(JournalEntry {
            login: rec.get(0).unwrap_or("").to_string(),
            label,
        });
    }
    Ok(out)
}

pub type GroundTruth = BTreeMap<String, (LabelValue, Option<BotCategory>)>;

/// Writes a `login,value,category` ground-truth file.
pub fn write_ground_truth<W: Write>(writer: W, truth: &GroundTruth) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["login", "value", "category"])?;
    for (login, (value, category)) in truth {
        w.write_record([
            login.clone(),
            value.as_u8().to_string(),
            category.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads labels from either a `login,value,category` ground-truth file or a
/// label journal; journals contribute confirmed accounts only.
pub fn read_ground_truth<R: Read>(mut reader: R) -> Result<GroundTruth> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or("").trim();
    if first == JOURNAL_HEADER.join(",") {
        let entries = read_journal(text.as_bytes())?;
        let mut store = LabelStore::new(entries.iter().map(|e| e.login.clone()));
        store.replay(entries)?;
        let mut out = GroundTruth::new();
        for login in store.with_status(LabelStatus::Confirmed).map(str::to_string).collect::<Vec<_>>() {
            let r = store.resolution(&login).expect("known login");
            out.insert(login, (r.value.expect("confirmed"), r.category));
        }
        return Ok(out);
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(["login", "value", "category"]) {
        return Err(Error::format("labels file must have header login,value,category"));
    }
    let mut out = GroundTruth::new();
    for rec in rdr.records() {
        let rec = rec?;
        let value: LabelValue = rec.get(1).unwrap_or("").parse()?;
        let category = match rec.get(2).unwrap_or("") {
            "" => None,
            s => Some(s.parse()?),
        };
        out.insert(rec.get(0).unwrap_or("").to_string(), (value, category));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at() -> DateTime<Utc> {
        parse_timestamp("2021-05-01T12:00:00Z").unwrap()
    }

    fn bot(who: &str) -> Label {
        Label::new(LabelValue::Bot, Some(BotCategory::Scanning), who, at()).unwrap()
    }

    fn human(who: &str) -> Label {
        Label::new(LabelValue::Human, None, who, at()).unwrap()
    }

    #[test]
    fn agreement_confirms() {
        let mut s = LabelStore::new(["acct"]);
        assert_eq!(s.status("acct"), Some(LabelStatus::Unlabeled));
        assert_eq!(s.record_label("acct", bot("ann1")).unwrap().status, LabelStatus::Pending);
        let r = s.record_label("acct", bot("ann2")).unwrap();
        assert_eq!(r.status, LabelStatus::Confirmed);
        assert_eq!(r.value, Some(LabelValue::Bot));
        assert_eq!(r.category, Some(BotCategory::Scanning));
    }

    #[test]
    fn disagreement_needs_tiebreak() {
        let mut s = LabelStore::new(["acct"]);
        s.record_label("acct", bot("a")).unwrap();
        assert_eq!(s.record_label("acct", human("b")).unwrap().status, LabelStatus::Conflict);
        let r = s.record_label("acct", human("c")).unwrap();
        assert_eq!(r.status, LabelStatus::Confirmed);
        assert_eq!(r.value, Some(LabelValue::Human));
        assert_eq!(r.category, None);
    }

    #[test]
    fn same_annotator_replaces() {
        let mut s = LabelStore::new(["acct"]);
        s.record_label("acct", bot("a")).unwrap();
        assert_eq!(s.record_label("acct", human("a")).unwrap().status, LabelStatus::Pending);
        assert_eq!(s.labels_of("acct").unwrap().len(), 1);
    }

    #[test]
    fn confirmed_never_reopens() {
        let mut s = LabelStore::new(["acct"]);
        s.record_label("acct", bot("a")).unwrap();
        s.record_label("acct", bot("b")).unwrap();
        assert!(matches!(s.record_label("acct", human("a")), Err(Error::LabelConflict(_))));
        assert_eq!(s.status("acct"), Some(LabelStatus::Confirmed));
        // a dissenting third opinion leaves the majority in place
        assert_eq!(s.record_label("acct", human("c")).unwrap().status, LabelStatus::Confirmed);
    }

    #[test]
    fn unknown_login() {
        let mut s = LabelStore::new(["acct"]);
        assert!(matches!(s.record_label("ghost", bot("a")), Err(Error::NotFound(_))));
    }

    #[test]
    fn export_gated_on_confirmation() {
        use crate::features::FeatureVector;
        let rows: Vec<FeatureRow> = ["x", "y"]
            .iter()
            .map(|l| FeatureRow {
                login: l.to_string(),
                features: FeatureVector::default(),
                label: None,
                category: None,
            })
            .collect();
        let mut s = LabelStore::new(["x", "y"]);
        s.record_label("x", bot("a")).unwrap();
        assert!(s.export_rows(&rows).is_empty());
        s.record_label("x", bot("b")).unwrap();
        let out = s.export_rows(&rows);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, Some(LabelValue::Bot));
    }

    #[test]
    fn invalid_labels() {
        assert!(Label::new(LabelValue::Human, Some(BotCategory::CICD), "a", at()).is_err());
        assert!(Label::new(LabelValue::Bot, None, " ", at()).is_err());
    }

    #[test]
    fn journal_round_trip_and_replay() {
        let entries = vec![
            JournalEntry { login: "x".into(), label: bot("a") },
            JournalEntry { login: "x".into(), label: bot("b") },
            JournalEntry { login: "y".into(), label: human("a") },
        ];
        let mut buf = Vec::new();
        append_journal(&mut buf, &entries[..1], true).unwrap();
        append_journal(&mut buf, &entries[1..], false).unwrap();
        let back = read_journal(buf.as_slice()).unwrap();
        assert_eq!(back, entries);
        let truth = read_ground_truth(buf.as_slice()).unwrap();
        assert_eq!(truth.len(), 1);
        assert_eq!(truth["x"], (LabelValue::Bot, Some(BotCategory::Scanning)));
    }

    #[test]
    fn status_machine_moves_forward() {
        // UNLABELED -> PENDING -> {CONFIRMED, CONFLICT} -> CONFIRMED
        let rank = |s: LabelStatus| match s {
            LabelStatus::Unlabeled => 0,
            LabelStatus::Pending => 1,
            LabelStatus::Conflict => 2,
            LabelStatus::Confirmed => 3,
        };
        let mut s = LabelStore::new(["acct"]);
        let mut last = rank(s.status("acct").unwrap());
        for l in [bot("a"), human("b"), bot("c"), human("d"), human("e"), human("a")] {
            let _ = s.record_label("acct", l);
            let now = rank(s.status("acct").unwrap());
            assert!(now >= last);
            last = now;
        }
        assert_eq!(last, 3);
    }
}
