//! Annotation HTTP/JSON API.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use botsift_core::dataset::{
    append_journal, read_journal, BotCategory, JournalEntry, Label, LabelStatus, LabelStore, LabelValue,
};
use botsift_core::events::{format_timestamp, Account, Event, TimelineSet};
use botsift_core::features::{write_feature_table, FeatureRow, FEATURE_NAMES, N_FEATURES};
use botsift_core::Error;
use chrono::{Timelike, Utc};
use serde::Deserialize;
use serde_json::{json, Map, Value};

pub const RECENT_EVENTS: usize = 50;
pub const RECENT_COMMENTS: usize = 20;
pub const DEFAULT_LIMIT: usize = 50;
pub const MAX_LIMIT: usize = 1000;

/// Features shown in the queue listing.
const SUMMARY_FEATURES: [&str; 5] = [
    "f_tag",
    "n_activity",
    "n_active_days",
    "median_response_time",
    "comment_similarity",
];

struct Journal {
    store: LabelStore,
    path: Option<PathBuf>,
}

/// Shared server state: read-only features and evidence, plus the
/// single-writer label store behind a mutex.
pub struct AppState {
    rows: Vec<FeatureRow>,
    index: HashMap<String, usize>,
    /// Sorted non-missing values per feature, for percentiles.
    sorted: Vec<Vec<f64>>,
    accounts: BTreeMap<String, Account>,
    journal: Mutex<Journal>,
}

impl AppState {
    /// Builds the state, replaying an existing journal at `journal`
    /// (created with a header when missing). `None` keeps labels in memory.
    pub fn new(
        rows: Vec<FeatureRow>,
        timelines: Option<TimelineSet>,
        journal: Option<&Path>,
    ) -> botsift_core::Result<Self> {
        let mut index = HashMap::new();
        for (i, r) in rows.iter().enumerate() {
            if index.insert(r.login.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate login {:?}", r.login)));
            }
        }
        let mut sorted = vec![Vec::new(); N_FEATURES];
        for r in &rows {
            for (j, v) in r.features.values().into_iter().enumerate() {
                if let Some(v) = v {
                    sorted[j].push(v);
                }
            }
        }
        for col in &mut sorted {
            col.sort_by(f64::total_cmp);
        }
        let mut store = LabelStore::new(rows.iter().map(|r| r.login.clone()));
        if let Some(path) = journal {
            let existing = path.exists() && std::fs::metadata(path)?.len() > 0;
            if existing {
                let entries = read_journal(BufReader::new(File::open(path)?))?;
                store.replay(entries)?;
            } else {
                append_journal(File::create(path)?, &[], true)?;
            }
        }
        Ok(Self {
            rows,
            index,
            sorted,
            accounts: timelines.map(|t| t.accounts()).unwrap_or_default(),
            journal: Mutex::new(Journal {
                store,
                path: journal.map(Path::to_path_buf),
            }),
        })
    }

    /// Mid-rank percentile in [0, 100] of `v` within feature `j`.
    fn percentile(&self, j: usize, v: f64) -> Option<f64> {
        let col = &self.sorted[j];
        if col.is_empty() {
            return None;
        }
        let below = col.partition_point(|&x| x < v);
        let upto = col.partition_point(|&x| x <= v);
        let rank = below as f64 + 0.5 * (upto - below) as f64;
        Some(100.0 * rank / col.len() as f64)
    }

    fn row(&self, login: &str) -> Option<&FeatureRow> {
        self.index.get(login).map(|&i| &self.rows[i])
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/accounts", get(list_accounts))
        .route("/api/accounts/{login}", get(account_detail))
        .route("/api/accounts/{login}/label", post(post_label))
        .route("/api/progress", get(progress))
        .route("/api/export", get(export))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn not_found(login: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown account {login:?}"))
}

fn internal(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, msg.into())
}

fn lock(state: &AppState) -> Result<std::sync::MutexGuard<'_, Journal>, ApiError> {
    state.journal.lock().map_err(|_| internal("label store poisoned"))
}

fn value_name(v: LabelValue) -> &'static str {
    match v {
        LabelValue::Bot => "bot",
        LabelValue::Human => "human",
    }
}

fn label_json(l: &Label) -> Value {
    json!({
        "value": value_name(l.value),
        "category": l.category.map(|c| c.to_string()),
        "annotator": l.annotator,
        "decided_at": format_timestamp(l.decided_at),
    })
}

fn parse_usize(q: &HashMap<String, String>, key: &str, default: usize) -> Result<usize, ApiError> {
    match q.get(key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| bad_request(format!("{key} must be a non-negative integer"))),
    }
}

async fn list_accounts(
    State(state): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<Value>, ApiError> {
    let status: Option<LabelStatus> = match q.get("status") {
        None => None,
        Some(s) => Some(s.parse().map_err(|e: Error| bad_request(e.to_string()))?),
    };
    let offset = parse_usize(&q, "offset", 0)?;
    let limit = parse_usize(&q, "limit", DEFAULT_LIMIT)?.min(MAX_LIMIT);
    let journal = lock(&state)?;
    let mut rows: Vec<(&FeatureRow, LabelStatus)> = state
        .rows
        .iter()
        .map(|r| (r, journal.store.status(&r.login).unwrap_or(LabelStatus::Unlabeled)))
        .filter(|(_, s)| status.is_none_or(|want| *s == want))
        .collect();
    rows.sort_by(|a, b| a.0.login.cmp(&b.0.login));
    let total = rows.len();
    let items: Vec<Value> = rows
        .into_iter()
        .skip(offset)
        .take(limit)
        .map(|(r, s)| {
            let values = r.features.values();
            let summary: Map<String, Value> = SUMMARY_FEATURES
                .iter()
                .map(|name| {
                    let j = FEATURE_NAMES.iter().position(|n| n == name).expect("known feature");
                    (name.to_string(), json!(values[j]))
                })
                .collect();
            json!({ "login": r.login, "status": s, "summary": summary })
        })
        .collect();
    Ok(Json(json!({
        "status": status,
        "total": total,
        "offset": offset,
        "limit": limit,
        "accounts": items,
    })))
}

fn event_json(e: &Event) -> Value {
    json!({
        "event_type": e.event_type,
        "repo_id": e.repo_id,
        "occurred_at": format_timestamp(e.occurred_at),
        "thread_key": e.thread_key,
        "comment_text": e.comment_text,
        "commit_count": e.commit_count,
    })
}

async fn account_detail(
    State(state): State<Arc<AppState>>,
    UrlPath(login): UrlPath<String>,
) -> Result<Json<Value>, ApiError> {
    let row = state.row(&login).ok_or_else(|| not_found(&login))?;
    let values = row.features.values();
    let percentiles: Map<String, Value> = FEATURE_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| (name.to_string(), json!(values[j].and_then(|v| state.percentile(j, v)))))
        .collect();
    let (profile, events, comments) = match state.accounts.get(&login) {
        None => (Value::Null, Vec::new(), Vec::new()),
        Some(a) => {
            let recent = a.timeline.events.iter().rev();
            let events: Vec<Value> = recent.clone().take(RECENT_EVENTS).map(event_json).collect();
            let comments: Vec<Value> = recent
                .filter_map(|e| {
                    e.comment_text.as_ref().map(|t| {
                        json!({
                            "occurred_at": format_timestamp(e.occurred_at),
                            "thread_key": e.thread_key,
                            "text": t,
                        })
                    })
                })
                .take(RECENT_COMMENTS)
                .collect();
            (serde_json::to_value(&a.profile).map_err(|e| internal(e.to_string()))?, events, comments)
        }
    };
    let journal = lock(&state)?;
    let status = journal.store.status(&login).unwrap_or(LabelStatus::Unlabeled);
    let labels: Vec<Value> = journal
        .store
        .labels_of(&login)
        .unwrap_or(&[])
        .iter()
        .map(label_json)
        .collect();
    Ok(Json(json!({
        "login": login,
        "status": status,
        "labels": labels,
        "features": row.features,
        "percentiles": percentiles,
        "profile": profile,
        "events": events,
        "comments": comments,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelBody {
    value: String,
    #[serde(default)]
    category: Option<String>,
    annotator: String,
}

async fn post_label(
    State(state): State<Arc<AppState>>,
    UrlPath(login): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let body: LabelBody =
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("invalid body: {e}")))?;
    let value = match body.value.as_str() {
        "bot" => LabelValue::Bot,
        "human" => LabelValue::Human,
        other => return Err(bad_request(format!("value must be \"bot\" or \"human\", got {other:?}"))),
    };
    let category: Option<BotCategory> = match body.category.as_deref() {
        None | Some("") => None,
        Some(c) => Some(c.parse().map_err(|e: Error| bad_request(e.to_string()))?),
    };
    let now = Utc::now();
    let decided_at = now.with_nanosecond(0).unwrap_or(now);
    let label =
        Label::new(value, category, body.annotator, decided_at).map_err(|e| bad_request(e.to_string()))?;
    if state.row(&login).is_none() {
        return Err(not_found(&login));
    }

    let mut journal = lock(&state)?;
    let resolution = match journal.store.record_label(&login, label.clone()) {
        Ok(r) => r,
        Err(Error::LabelConflict(msg)) => return Err(ApiError(StatusCode::CONFLICT, msg)),
        Err(Error::NotFound(_)) => return Err(not_found(&login)),
        Err(e) => return Err(bad_request(e.to_string())),
    };
    if let Some(path) = &journal.path {
        let entry = JournalEntry {
            login: login.clone(),
            label,
        };
        OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(Error::from)
            .and_then(|f| append_journal(f, &[entry], false))
            .map_err(|e| internal(format!("journal write failed: {e}")))?;
    }
    let n_labels = journal.store.labels_of(&login).map_or(0, <[Label]>::len);
    log::info!("label {login}: {}", resolution.status);
    Ok(Json(json!({
        "login": login,
        "status": resolution.status,
        "value": resolution.value.map(value_name),
        "category": resolution.category.map(|c| c.to_string()),
        "n_labels": n_labels,
    })))
}

async fn progress(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let journal = lock(&state)?;
    let counts = journal.store.progress();
    let mut out = Map::new();
    for s in LabelStatus::ALL {
        out.insert(s.to_string(), json!(counts.get(&s).copied().unwrap_or(0)));
    }
    out.insert("total".into(), json!(state.rows.len()));
    Ok(Json(Value::Object(out)))
}

async fn export(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let rows = lock(&state)?.store.export_rows(&state.rows);
    let mut buf = Vec::new();
    write_feature_table(&mut buf, &rows).map_err(|e| internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], buf).into_response())
}
