//! HTTP service for the teaching front end.
//!
//! Readers work on an `Arc` snapshot of the pattern store; teaching goes
//! through a single writer that clones, learns, persists and swaps. Every
//! response carries the store version in its body and in an `ETag` header.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use metaqa_core::distractor::Mcq;
use metaqa_core::matcher::MatchKind;
use metaqa_core::msdip::{learn_for_md, Origin};
use metaqa_core::qapgen::{bootstrap_requests, generate_qaps, Rejection, TeachRequest};
use metaqa_core::{MergeMode, MetaSequence, MsdipStore, Qap, TaggedSentence};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::assets::Assets;
use crate::io;
use crate::pipeline::{assemble_records, distract_qap, run_tagger, unix_now, DistractSettings};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub mode: MergeMode,
    /// Where taught pairs are persisted; in memory only when `None`.
    pub msdip: Option<PathBuf>,
    pub tagger: Option<String>,
    pub distract: DistractSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeachStatus {
    Pending,
    Taught,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeachEntry {
    pub id: String,
    pub sentence_id: String,
    pub clause: String,
    pub xs: MetaSequence,
    pub best_md: Option<MetaSequence>,
    pub best_kind: Option<MatchKind>,
    pub lcs_len: usize,
    pub status: TeachStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QapEntry {
    #[serde(flatten)]
    pub qap: Qap,
    pub review: Option<Verdict>,
}

#[derive(Debug, Default)]
struct Board {
    requests: Vec<TeachEntry>,
    next_request: u64,
    qaps: Vec<QapEntry>,
    sentences: BTreeMap<String, TaggedSentence>,
}

impl Board {
    fn enqueue(&mut self, reqs: Vec<TeachRequest>) -> Vec<TeachEntry> {
        let mut pending: BTreeSet<String> = self
            .requests
            .iter()
            .filter(|r| r.status == TeachStatus::Pending)
            .map(|r| r.xs.encode())
            .collect();
        let mut added = Vec::new();
        for r in reqs {
            if !pending.insert(r.xs.encode()) {
                continue;
            }
            self.next_request += 1;
            let entry = TeachEntry {
                id: format!("t{}", self.next_request),
                sentence_id: r.sentence_id,
                clause: r.clause,
                xs: r.xs,
                best_md: r.best_md,
                best_kind: r.best_kind,
                lcs_len: r.lcs_len,
                status: TeachStatus::Pending,
            };
            self.requests.push(entry.clone());
            added.push(entry);
        }
        added
    }
}

pub struct ServiceState {
    cfg: ServiceConfig,
    store: RwLock<Arc<MsdipStore>>,
    writer: tokio::sync::Mutex<()>,
    board: Mutex<Board>,
    assets: Option<Assets>,
}

impl ServiceState {
    pub fn new(cfg: ServiceConfig, store: MsdipStore, assets: Option<Assets>) -> Arc<Self> {
        Arc::new(ServiceState {
            cfg,
            store: RwLock::new(Arc::new(store)),
            writer: tokio::sync::Mutex::new(()),
            board: Mutex::new(Board::default()),
            assets,
        })
    }

    pub fn snapshot(&self) -> Arc<MsdipStore> {
        self.store.read().expect("store lock").clone()
    }

    pub fn version(&self) -> u64 {
        self.snapshot().version()
    }

    fn board(&self) -> std::sync::MutexGuard<'_, Board> {
        self.board.lock().expect("board lock")
    }
}

type Shared = Arc<ServiceState>;

fn reply(version: u64, status: StatusCode, mut body: Value) -> Response {
    if let Value::Object(m) = &mut body {
        m.insert("version".into(), json!(version));
    }
    let mut resp = (status, Json(body)).into_response();
    resp.headers_mut().insert(
        header::ETAG,
        HeaderValue::from_str(&format!("\"{version}\"")).expect("ascii etag"),
    );
    resp
}

fn fail(version: u64, status: StatusCode, message: impl Into<String>) -> Response {
    reply(version, status, json!({ "error": message.into() }))
}

/// Tagged sentences from a body carrying either tagged sentences or raw text.
async fn sentences_from(
    st: &ServiceState,
    tagged: Option<Vec<TaggedSentence>>,
    texts: Option<Vec<String>>,
) -> Result<Vec<TaggedSentence>, String> {
    let sentences = match (tagged, texts) {
        (Some(s), _) => s,
        (None, Some(texts)) => {
            let Some(cmd) = st.cfg.tagger.clone() else {
                return Err("raw text needs a tagger; send tagged sentences instead".into());
            };
            let joined = texts.join("\n");
            tokio::task::spawn_blocking(move || run_tagger(&cmd, &joined))
                .await
                .map_err(|e| e.to_string())?
                .map_err(|e| e.to_string())?
        }
        (None, None) => return Err("body has no sentences".into()),
    };
    for s in &sentences {
        if let Some(v) = metaqa_core::annotation::validate_sentence(s).first() {
            return Err(format!("sentence {}: {v}", s.id));
        }
    }
    Ok(sentences)
}

async fn get_version(State(st): State<Shared>) -> Response {
    let store = st.snapshot();
    reply(
        store.version(),
        StatusCode::OK,
        json!({ "mds": store.len(), "pairs": store.pair_count() }),
    )
}

async fn get_teach(State(st): State<Shared>) -> Response {
    let version = st.version();
    let pending: Vec<TeachEntry> = st
        .board()
        .requests
        .iter()
        .rev()
        .filter(|r| r.status == TeachStatus::Pending)
        .cloned()
        .collect();
    reply(version, StatusCode::OK, json!({ "requests": pending }))
}

#[derive(Debug, Deserialize)]
struct TeachBody {
    interrogatives: Option<Vec<TaggedSentence>>,
    texts: Option<Vec<String>>,
}

fn if_match(headers: &HeaderMap) -> Option<Result<u64, ()>> {
    let raw = headers.get(header::IF_MATCH)?;
    let v = raw.to_str().map_err(|_| ());
    Some(v.and_then(|v| {
        v.trim()
            .trim_start_matches("W/")
            .trim_matches('"')
            .parse()
            .map_err(|_| ())
    }))
}

async fn post_teach(
    State(st): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Json(body): Json<TeachBody>,
) -> Response {
    let Some(xs) = st.board().requests.iter().find(|r| r.id == id).map(|r| r.xs.clone()) else {
        return fail(st.version(), StatusCode::NOT_FOUND, format!("no teach request {id}"));
    };
    let questions = match sentences_from(&st, body.interrogatives, body.texts).await {
        Ok(q) => q,
        Err(e) => return fail(st.version(), StatusCode::UNPROCESSABLE_ENTITY, e),
    };

    let _writer = st.writer.lock().await;
    let current = st.snapshot();
    match if_match(&headers) {
        Some(Err(())) => return fail(current.version(), StatusCode::BAD_REQUEST, "If-Match must be a store version"),
        Some(Ok(v)) if v != current.version() => {
            return reply(
                current.version(),
                StatusCode::CONFLICT,
                json!({
                    "error": format!("store changed: you have version {v}"),
                    "retry": "reload the teach queue and resend with the current version",
                }),
            );
        }
        _ => {}
    }
    let mut next = (*current).clone();
    let now = unix_now();
    let mut added = 0;
    for q in &questions {
        match learn_for_md(xs.clone(), q, st.cfg.mode, &mut next, Origin::Taught, now) {
            Ok(l) => added += usize::from(l.added),
            Err(e) => {
                return fail(
                    current.version(),
                    StatusCode::UNPROCESSABLE_ENTITY,
                    format!("question {}: {e}", q.id),
                )
            }
        }
    }
    if added > 0 {
        if let Some(path) = &st.cfg.msdip {
            if let Err(e) = io::save_store(path, &next) {
                return fail(current.version(), StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
            }
        }
        *st.store.write().expect("store lock") = Arc::new(next);
    }
    let version = st.version();
    let mut board = st.board();
    if let Some(r) = board.requests.iter_mut().find(|r| r.id == id) {
        r.status = TeachStatus::Taught;
    }
    reply(version, StatusCode::OK, json!({ "id": id, "added": added }))
}

#[derive(Debug, Deserialize)]
struct GenerateBody {
    sentences: Option<Vec<TaggedSentence>>,
    texts: Option<Vec<String>>,
}

async fn post_generate(State(st): State<Shared>, Json(body): Json<GenerateBody>) -> Response {
    let sentences = match sentences_from(&st, body.sentences, body.texts).await {
        Ok(s) => s,
        Err(e) => return fail(st.version(), StatusCode::UNPROCESSABLE_ENTITY, e),
    };
    let store = st.snapshot();
    let mut qaps: Vec<Qap> = Vec::new();
    let mut requests: Vec<TeachRequest> = Vec::new();
    let mut rejections: Vec<Rejection> = Vec::new();
    for s in &sentences {
        match generate_qaps(s, &store, st.cfg.mode) {
            Ok(g) => {
                qaps.extend(g.qaps);
                requests.extend(g.teach_requests);
                rejections.extend(g.rejections);
            }
            Err(_) => requests.extend(bootstrap_requests(s, st.cfg.mode)),
        }
    }
    let mut board = st.board();
    for s in sentences {
        board.qaps.retain(|q| q.qap.source != s.id);
        board.sentences.insert(s.id.clone(), s);
    }
    board.qaps.extend(qaps.iter().cloned().map(|qap| QapEntry { qap, review: None }));
    let new_requests = board.enqueue(requests);
    reply(
        store.version(),
        StatusCode::OK,
        json!({ "qaps": qaps, "teach_requests": new_requests, "rejections": rejections }),
    )
}

async fn get_qaps(State(st): State<Shared>) -> Response {
    let version = st.version();
    let qaps = st.board().qaps.clone();
    reply(version, StatusCode::OK, json!({ "qaps": qaps }))
}

#[derive(Debug, Deserialize)]
struct ReviewBody {
    verdict: Verdict,
}

async fn post_review(State(st): State<Shared>, Path(id): Path<String>, Json(body): Json<ReviewBody>) -> Response {
    let version = st.version();
    let mut board = st.board();
    match board.qaps.iter_mut().find(|q| q.qap.id == id) {
        Some(q) => {
            q.review = Some(body.verdict);
            let q = q.clone();
            reply(version, StatusCode::OK, json!({ "qap": q }))
        }
        None => fail(version, StatusCode::NOT_FOUND, format!("no QAP {id}")),
    }
}

/// MCQs for every QAP not rejected in review.
async fn get_mcqs(State(st): State<Shared>) -> Response {
    let version = st.version();
    let Some(assets) = &st.assets else {
        return fail(version, StatusCode::SERVICE_UNAVAILABLE, "no lexical resources configured");
    };
    let (qaps, corpus): (Vec<Qap>, Vec<TaggedSentence>) = {
        let board = st.board();
        (
            board
                .qaps
                .iter()
                .filter(|q| q.review != Some(Verdict::Reject))
                .map(|q| q.qap.clone())
                .collect(),
            board.sentences.values().cloned().collect(),
        )
    };
    let records: Vec<_> = qaps
        .iter()
        .map(|q| distract_qap(q, &corpus, assets, st.cfg.distract))
        .collect();
    let mcqs: Vec<Mcq> = assemble_records(&records, st.cfg.distract.seed);
    reply(
        version,
        StatusCode::OK,
        json!({ "mcqs": mcqs, "skipped": records.len() - mcqs.len() }),
    )
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/msdip/version", get(get_version))
        .route("/api/teach", get(get_teach))
        .route("/api/teach/{id}", post(post_teach))
        .route("/api/generate", post(post_generate))
        .route("/api/qaps", get(get_qaps))
        .route("/api/qaps/{id}/review", post(post_review))
        .route("/api/mcqs", get(get_mcqs))
        .with_state(state)
}

/// Serves until interrupted.
pub async fn serve(state: Shared, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
