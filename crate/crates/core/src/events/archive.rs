use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{format_timestamp, parse_timestamp, Event, EventType, Window};
use crate::error::{Error, Result};

/// Result of reading one archive stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedArchive {
    /// In-window events, in input order.
    pub events: Vec<Event>,
    /// Lines that could not be mapped to an event.
    pub skipped: usize,
    /// Well-formed lines dropped by the window filter.
    pub out_of_window: usize,
    /// Non-blank lines seen.
    pub lines: usize,
}

/// Opens a plain or gzip-compressed archive, sniffing the gzip magic bytes.
pub fn open_archive(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Parses line-delimited GH-Archive events, keeping those inside `window`.
///
/// Malformed lines are skipped and counted. When more than half of the
/// non-blank lines are malformed the stream is rejected as corrupt.
pub fn parse_archive<R: BufRead>(mut reader: R, window: &Window) -> Result<ParsedArchive> {
    let mut lines = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        if buf.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        lines.push(std::mem::take(&mut buf));
    }

    let parsed: Vec<Option<Event>> = lines
        .par_iter()
        .map(|line| std::str::from_utf8(line).ok().and_then(parse_line))
        .collect();

    let mut out = ParsedArchive {
        lines: lines.len(),
        ..Default::default()
    };
    for event in parsed {
        match event {
            None => out.skipped += 1,
            Some(e) if window.contains(e.occurred_at) => out.events.push(e),
            Some(_) => out.out_of_window += 1,
        }
    }
    if out.skipped * 2 > out.lines {
        return Err(Error::CorruptArchive {
            malformed: out.skipped,
            total: out.lines,
        });
    }
    Ok(out)
}

fn as_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_line(line: &str) -> Option<Event> {
    let v: Value = serde_json::from_str(line).ok()?;
    let kind = v.get("type")?.as_str()?;
    let login = v.get("actor")?.get("login")?.as_str()?;
    let repo = as_id(v.get("repo")?.get("id")?)?;
    let at = parse_timestamp(v.get("created_at")?.as_str()?).ok()?;
    let empty = Value::Null;
    let payload = v.get("payload").unwrap_or(&empty);
    let action = payload.get("action").and_then(Value::as_str);
    let number = |obj: &str| {
        payload
            .get(obj)
            .and_then(|o| o.get("number"))
            .or_else(|| payload.get("number"))
            .and_then(Value::as_u64)
    };
    let body = || {
        payload
            .get("comment")
            .and_then(|c| c.get("body"))
            .and_then(Value::as_str)
            .map(str::to_string)
    };

    let (event_type, thread, text, commits) = match kind {
        "IssuesEvent" if action == Some("opened") => (EventType::IssueOpen, number("issue"), None, 0),
        "IssueCommentEvent" => {
            let on_pr = payload
                .get("issue")
                .and_then(|i| i.get("pull_request"))
                .is_some_and(|p| !p.is_null());
            let t = if on_pr {
                EventType::PullRequestComment
            } else {
                EventType::IssueComment
            };
            (t, Some(number("issue")?), body(), 0)
        }
        "PullRequestReviewCommentEvent" => (
            EventType::PullRequestComment,
            Some(number("pull_request")?),
            body(),
            0,
        ),
        "PullRequestEvent" if action == Some("opened") => {
            (EventType::PullRequestOpen, Some(number("pull_request")?), None, 0)
        }
        "PullRequestEvent"
            if action == Some("closed")
                && payload
                    .get("pull_request")
                    .and_then(|p| p.get("merged"))
                    .and_then(Value::as_bool)
                    == Some(true) =>
        {
            (EventType::PullRequestMerge, Some(number("pull_request")?), None, 0)
        }
        "PushEvent" => {
            let size = payload
                .get("size")
                .and_then(Value::as_u64)
                .or_else(|| {
                    payload
                        .get("commits")
                        .and_then(Value::as_array)
                        .map(|c| c.len() as u64)
                })
                .unwrap_or(0);
            (EventType::Push, None, None, size)
        }
        "CreateEvent" => (EventType::Create, None, None, 0),
        _ => (EventType::Other, None, None, 0),
    };
    if event_type == EventType::IssueOpen && thread.is_none() {
        return None;
    }
    Event::new(login, repo, event_type, at, thread, text, commits).ok()
}

fn repo_value(repo_id: &str) -> Value {
    match repo_id.parse::<u64>() {
        Ok(n) => json!(n),
        Err(_) => json!(repo_id),
    }
}

/// GH-Archive shaped JSON object for one event; the inverse of parsing.
pub fn event_to_json(e: &Event) -> Value {
    let number = e.thread_number();
    let (kind, payload) = match e.event_type {
        EventType::IssueOpen => (
            "IssuesEvent",
            json!({"action": "opened", "issue": {"number": number}}),
        ),
        EventType::IssueComment => (
            "IssueCommentEvent",
            json!({"action": "created", "issue": {"number": number},
                   "comment": {"body": e.comment_text}}),
        ),
        EventType::PullRequestComment => (
            "IssueCommentEvent",
            json!({"action": "created", "issue": {"number": number, "pull_request": {}},
                   "comment": {"body": e.comment_text}}),
        ),
        EventType::PullRequestOpen => (
            "PullRequestEvent",
            json!({"action": "opened", "number": number,
                   "pull_request": {"number": number, "merged": false}}),
        ),
        EventType::PullRequestMerge => (
            "PullRequestEvent",
            json!({"action": "closed", "number": number,
                   "pull_request": {"number": number, "merged": true}}),
        ),
        EventType::Push => ("PushEvent", json!({"size": e.commit_count})),
        EventType::Create => ("CreateEvent", json!({"ref_type": "branch"})),
        EventType::Other => ("WatchEvent", json!({"action": "started"})),
    };
    json!({
        "type": kind,
        "actor": {"login": e.actor_login},
        "repo": {"id": repo_value(&e.repo_id)},
        "payload": payload,
        "created_at": format_timestamp(e.occurred_at),
    })
}

/// Writes events as line-delimited GH-Archive JSON.
pub fn write_archive<W: Write>(mut w: W, events: &[Event]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, &event_to_json(e))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
