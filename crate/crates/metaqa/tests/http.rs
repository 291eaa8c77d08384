mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use common::{data, example_corpus, example_store};
use http_body_util::BodyExt;
use metaqa::assets::Assets;
use metaqa::io::{load_store, read_pairs, PairRecord};
use metaqa::pipeline::DistractSettings;
use metaqa::service::{router, ServiceConfig, ServiceState};
use metaqa_core::resources::DEFAULT_INTERVAL;
use metaqa_core::{MergeMode, MsdipStore, TaggedSentence};
use serde_json::{json, Value};
use tower::ServiceExt;

fn config(mode: MergeMode) -> ServiceConfig {
    ServiceConfig {
        mode,
        msdip: None,
        tagger: None,
        distract: DistractSettings {
            interval: DEFAULT_INTERVAL,
            seed: 0,
            n: 3,
        },
    }
}

fn app(store: MsdipStore, cfg: ServiceConfig, assets: Option<Assets>) -> (Router, Arc<ServiceState>) {
    let st = ServiceState::new(cfg, store, assets);
    (router(st.clone()), st)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>, if_match: Option<&str>) -> (StatusCode, Value, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(v) = if_match {
        req = req.header("if-match", v);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let etag = resp.headers()["etag"].to_str().unwrap().to_string();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap(), etag)
}

fn pairs() -> Vec<PairRecord> {
    read_pairs(&data("examples/train_pairs.jsonl")).unwrap()
}

fn record(id: &str) -> PairRecord {
    pairs().into_iter().find(|r| r.declarative.id == id).unwrap()
}

fn sentence(id: &str) -> TaggedSentence {
    example_corpus().into_iter().find(|s| s.id == id).unwrap()
}

#[tokio::test]
async fn teach_amanda_then_generate_tom() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.json");
    let mut cfg = config(MergeMode::Ideal);
    cfg.msdip = Some(path.clone());
    let (app, _) = app(MsdipStore::new(), cfg, None);
    let amanda = record("amanda");

    let (s, body, etag) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": [amanda.declarative] })), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(etag, "\"0\"");
    assert_eq!(body["version"], 0);
    let reqs = body["teach_requests"].as_array().unwrap();
    assert_eq!(reqs.len(), 1);
    let id = reqs[0]["id"].as_str().unwrap().to_string();

    let (s, body, _) = call(&app, "GET", "/api/teach", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["requests"][0]["id"], id.as_str());

    let (s, body, etag) = call(
        &app,
        "POST",
        &format!("/api/teach/{id}"),
        Some(json!({ "interrogatives": amanda.interrogatives })),
        Some("\"0\""),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["added"], 2);
    let version = body["version"].as_u64().unwrap();
    assert!(version > 0);
    assert_eq!(etag, format!("\"{version}\""));
    assert_eq!(load_store(&path).unwrap().version(), version);

    let (_, body, _) = call(&app, "GET", "/api/teach", None, None).await;
    assert!(body["requests"].as_array().unwrap().is_empty());

    let (s, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": [sentence("tom")] })), None).await;
    assert_eq!(s, StatusCode::OK);
    let qs: Vec<(&str, &str)> = body["qaps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| (q["question"].as_str().unwrap(), q["answer"].as_str().unwrap()))
        .collect();
    assert_eq!(
        qs,
        [
            ("Who has a story book on the American history?", "Tom"),
            ("What does Tom have?", "a story book on the American history"),
        ]
    );
    let (_, body, _) = call(&app, "GET", "/api/msdip/version", None, None).await;
    assert_eq!(body["version"], version);
}

#[tokio::test]
async fn duncan_without_phrases_asks_for_one_pair() {
    let (app, _) = app(example_store(MergeMode::PhrasalAware), config(MergeMode::PhrasalAware), None);
    let mut duncan = sentence("duncan");
    duncan.phrases.clear();
    let (s, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": [duncan] })), None).await;
    assert_eq!(s, StatusCode::OK);
    let (_, body2, _) = call(&app, "GET", "/api/teach", None, None).await;
    let pending = body2["requests"].as_array().unwrap();
    assert_eq!(pending.len(), 1, "{body}");
    assert_eq!(pending[0]["xs"], "ARG0/NNP/PER V/VBZ/ ARG1/IN/ ARG1/NN/");
    assert!(pending[0]["lcs_len"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn concurrent_teaches_both_land() {
    let (app, st) = app(MsdipStore::new(), config(MergeMode::Ideal), None);
    let amanda = record("amanda");
    let doughnut = record("doughnut");
    let (_, body, _) = call(
        &app,
        "POST",
        "/api/generate",
        Some(json!({ "sentences": [amanda.declarative, doughnut.declarative] })),
        None,
    )
    .await;
    let ids: Vec<String> = body["teach_requests"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids.len(), 2);
    let before = st.version();
    let (ua, ub) = (format!("/api/teach/{}", ids[0]), format!("/api/teach/{}", ids[1]));
    let a = call(
        &app,
        "POST",
        &ua,
        Some(json!({ "interrogatives": [amanda.interrogatives[0]] })),
        None,
    );
    let b = call(
        &app,
        "POST",
        &ub,
        Some(json!({ "interrogatives": [doughnut.interrogatives[0]] })),
        None,
    );
    let (ra, rb) = tokio::join!(a, b);
    assert_eq!(ra.0, StatusCode::OK);
    assert_eq!(rb.0, StatusCode::OK);
    assert_eq!(st.version(), before + 2);
    assert_eq!(st.snapshot().pair_count(), 2);
}

#[tokio::test]
async fn stale_version_conflicts() {
    let (app, st) = app(MsdipStore::new(), config(MergeMode::Ideal), None);
    let amanda = record("amanda");
    let (_, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": [amanda.declarative] })), None).await;
    let id = body["teach_requests"][0]["id"].as_str().unwrap().to_string();
    let uri = format!("/api/teach/{id}");
    let (s, body, _) = call(&app, "POST", &uri, Some(json!({ "interrogatives": [amanda.interrogatives[0]] })), Some("\"5\"")).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["version"], 0);
    assert!(body["retry"].is_string());
    assert_eq!(st.version(), 0);
    let (s, _, _) = call(&app, "POST", &uri, Some(json!({ "interrogatives": [amanda.interrogatives[0]] })), Some("\"0\"")).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn unlearnable_questions_are_unprocessable() {
    let (app, st) = app(MsdipStore::new(), config(MergeMode::Ideal), None);
    let amanda = record("amanda");
    let (_, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": [amanda.declarative.clone()] })), None).await;
    let uri = format!("/api/teach/{}", body["teach_requests"][0]["id"].as_str().unwrap());
    let (s, body, _) = call(&app, "POST", &uri, Some(json!({ "interrogatives": [amanda.declarative] })), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(
        body["error"].as_str().unwrap().ends_with("question meta sequence has no interrogative pronoun"),
        "{body}"
    );
    let (s, body, _) = call(&app, "POST", &uri, Some(json!({ "texts": ["Who has a book?"] })), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("tagger"));
    let (s, _, _) = call(&app, "POST", "/api/teach/t99", Some(json!({ "interrogatives": [] })), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(st.version(), 0);
}

#[tokio::test]
async fn raw_text_goes_through_the_tagger() {
    let dir = tempfile::tempdir().unwrap();
    let tagged = dir.path().join("tom.jsonl");
    std::fs::write(&tagged, serde_json::to_string(&sentence("tom")).unwrap() + "\n").unwrap();
    let mut cfg = config(MergeMode::Ideal);
    cfg.tagger = Some(format!("cat >/dev/null; cat {}", tagged.display()));
    let (app, _) = app(example_store(MergeMode::Ideal), cfg, None);
    let (s, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "texts": ["Tom has a story book on the American history."] })), None).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["qaps"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn review_and_mcqs() {
    let assets = Assets::load(&data("embeddings.txt"), &data("lexicon.json"), &data("kb.json")).unwrap();
    let (app, _) = app(example_store(MergeMode::Ideal), config(MergeMode::Ideal), Some(assets));
    let (_, body, _) = call(&app, "POST", "/api/generate", Some(json!({ "sentences": example_corpus() })), None).await;
    assert_eq!(body["qaps"].as_array().unwrap().len(), 7);

    let (s, _, _) = call(&app, "POST", "/api/qaps/nope/review", Some(json!({ "verdict": "accept" })), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, body, _) = call(&app, "POST", "/api/qaps/tom-q1/review", Some(json!({ "verdict": "reject" })), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["qap"]["review"], "reject");

    let (_, body, _) = call(&app, "GET", "/api/qaps", None, None).await;
    assert_eq!(body["qaps"].as_array().unwrap().len(), 7);

    let (s, body, _) = call(&app, "GET", "/api/mcqs", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let mcqs = body["mcqs"].as_array().unwrap();
    assert!(!mcqs.is_empty());
    assert!(mcqs.iter().all(|m| m["id"] != "tom-q1"));
    for m in mcqs {
        assert_eq!(m["options"].as_array().unwrap().len(), 4);
    }
}

#[tokio::test]
async fn mcqs_need_resources() {
    let (app, _) = app(example_store(MergeMode::Ideal), config(MergeMode::Ideal), None);
    let (s, body, _) = call(&app, "GET", "/api/mcqs", None, None).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert!(body["error"].is_string());
}
