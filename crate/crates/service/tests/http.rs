//! The REST interface end to end over a real socket.

use std::sync::Arc;

use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

use crisis_mt_core::{CrisisPhase, LanguagePair, ReviewStatus, Segment};
use crisis_mt_service::{api, Role, Service, ServiceConfig};

struct Server {
    base: String,
    http: Client,
    service: Arc<Service>,
    _dir: tempfile::TempDir,
}

impl Server {
    async fn start() -> Server {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ServiceConfig::new(dir.path().join("store"))
            .with_token("cara", Role::Contributor, "tok-contrib")
            .with_token("rian", Role::Reviewer, "tok-review")
            .with_token("niamh", Role::Coordinator, "tok-coord");
        config.cors_origins = vec!["http://ui.example".into()];
        config.snapshot_every = 5;
        let service = Arc::new(Service::open(config).unwrap());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let app = api::router(service.clone());
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Server {
            base,
            http: Client::new(),
            service,
            _dir: dir,
        }
    }

    async fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let url = format!("{}{}", self.base, path);
        let mut req = match method {
            "GET" => self.http.get(url),
            _ => self.http.post(url),
        };
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    async fn submit(&self, src: &str, tgt: &str) -> (StatusCode, Value) {
        self.call(
            "POST",
            "/api/pairs/en-ga/segments",
            Some("tok-contrib"),
            Some(json!({"source_text": src, "target_text": tgt})),
        )
        .await
    }

    async fn accept(&self, id: &str) -> StatusCode {
        self.call("POST", &format!("/api/segments/{id}/review"), Some("tok-review"), Some(json!({"verdict": "accepted"})))
            .await
            .0
    }
}

fn is_error(body: &Value, code: &str) -> bool {
    body["error"] == code && body["message"].is_string()
}

#[tokio::test]
async fn submission_and_review_flow() {
    let s = Server::start().await;
    let (status, stats) = s.call("GET", "/api/pairs/en-ga/stats", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stats["total"], 0);
    assert_eq!(stats["by_status"]["pending"], 0);

    let (status, body) = s.submit("Stay at home", "Fan sa bhaile").await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["id"].as_str().unwrap().to_owned();
    assert_eq!(body["status"], "pending");
    assert_eq!(body["phase"], 1);
    assert_eq!(body["contributor"], "cara");
    let (_, stats) = s.call("GET", "/api/pairs/en-ga/stats", None, None).await;
    assert_eq!(stats["by_status"]["pending"], 1);
    assert_eq!(stats["contributors"], 1);

    let (status, body) = s.submit("Wash your hands", "   ").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_error(&body, "invalid_input"), "{body}");

    assert_eq!(s.accept(&id).await, StatusCode::OK);
    let (_, stats) = s.call("GET", "/api/pairs/en-ga/stats", None, None).await;
    assert_eq!((stats["by_status"]["pending"].as_u64(), stats["by_status"]["accepted"].as_u64()), (Some(0), Some(1)));
    let (status, body) = s.call("POST", &format!("/api/segments/{id}/review"), Some("tok-review"), Some(json!({"verdict": "rejected"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(is_error(&body, "already_reviewed"));

    let (status, body) = s.submit("stay at  HOME", "fan sa bhaile").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(is_error(&body, "duplicate"));
    assert_eq!(body["existing_id"], id.as_str());

    let (_, second) = s.submit("Keep your distance", "Coinnigh d'fhad").await;
    let second_id = second["id"].as_str().unwrap();
    let (status, _) = s
        .call("POST", &format!("/api/segments/{second_id}/review"), Some("tok-review"), Some(json!({"verdict": "rejected", "note": "literal calque"})))
        .await;
    assert_eq!(status, StatusCode::OK);
    let (_, got) = s.call("GET", &format!("/api/segments/{second_id}"), Some("tok-review"), None).await;
    assert_eq!(got["note"], "literal calque");
    assert_eq!(got["status"], "rejected");
    assert_eq!(got["reviewed_by"], "rian");

    let (status, _) = s.submit("Keep your distance", "Coinnigh d'fhad").await;
    assert_eq!(status, StatusCode::CREATED, "rejected segments free their key");

    let (status, body) = s.call("POST", "/api/segments/nope/review", Some("tok-review"), Some(json!({"verdict": "accepted"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_error(&body, "not_found"));

    let (status, page) = s.call("GET", "/api/pairs/en-ga/segments?status=pending", Some("tok-review"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(page["total"], 1);
    let (status, _) = s.call("GET", "/api/pairs/en-ga/segments", Some("tok-contrib"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    let (status, _) = s.call("GET", "/api/pairs/en-ga/segments?status=bogus", Some("tok-review"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn auth_and_pairs() {
    let s = Server::start().await;
    let (status, body) = s.call("POST", "/api/pairs/en-ga/segments", None, Some(json!({"source_text": "a", "target_text": "b"}))).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert!(is_error(&body, "unauthorized"));
    let (status, _) = s.call("POST", "/api/pairs/en-ga/segments", Some("wrong"), Some(json!({"source_text": "a", "target_text": "b"}))).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);

    let (_, who) = s.call("GET", "/api/session", Some("tok-review"), None).await;
    assert_eq!(who, json!({"name": "rian", "role": "reviewer"}));

    let (status, body) = s.call("POST", "/api/pairs/english-irish/segments", Some("tok-contrib"), Some(json!({"source_text": "a", "target_text": "b"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_error(&body, "invalid_pair"));
    let (status, body) = s.call("GET", "/api/pairs/fr-de/stats", None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_error(&body, "unknown_pair"));

    let (_, pairs) = s.call("GET", "/api/pairs", None, None).await;
    let names: Vec<&str> = pairs.as_array().unwrap().iter().map(|p| p["pair"].as_str().unwrap()).collect();
    assert_eq!(names, ["en-ga", "en-mr", "ga-en", "mr-en"]);

    let (status, _) = s.call("POST", "/api/pairs/en-ga/segments", Some("tok-contrib"), Some(json!({"source_text": "a", "target_text": "b", "stream": "expert"}))).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    let (status, _) = s.call("POST", "/api/pairs/en-ga/segments", Some("tok-contrib"), Some(json!({"text": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn phase_control() {
    let s = Server::start().await;
    let (status, body) = s.call("POST", "/api/pairs/en-ga/phase", Some("tok-contrib"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert!(is_error(&body, "forbidden"));
    let (status, _) = s.call("POST", "/api/pairs/en-ga/phase", Some("tok-review"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);

    let (status, body) = s.call("POST", "/api/pairs/en-ga/phase", Some("tok-coord"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["phase"], 2);
    let (_, seg) = s.submit("Boil water", "Fiuch uisce").await;
    assert_eq!(seg["phase"], 2);
    let (_, body) = s.call("POST", "/api/pairs/en-ga/phase", Some("tok-coord"), None).await;
    assert_eq!(body["phase"], 3);
    let (status, body) = s.call("POST", "/api/pairs/en-ga/phase", Some("tok-coord"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(is_error(&body, "final_phase"));
    let (_, stats) = s.call("GET", "/api/pairs/en-ga/stats", None, None).await;
    assert_eq!(stats["phase"], 3);
    assert_eq!(stats["by_phase"]["2"], 1);
    let (_, other) = s.call("GET", "/api/pairs/ga-en/stats", None, None).await;
    assert_eq!(other["phase"], 1);
}

#[tokio::test]
async fn exports_are_split_and_immutable() {
    let s = Server::start().await;
    let (status, body) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");

    for i in 0..10 {
        let (_, body) = s.submit(&format!("public notice number {i}"), &format!("fógra poiblí uimhir {i}")).await;
        assert_eq!(s.accept(body["id"].as_str().unwrap()).await, StatusCode::OK);
    }
    let options = json!({"dedup": true, "ratios": {"train": 0.8, "validation": 0.1, "test": 0.1}, "seed": 7, "format": "bitext"});
    let (status, _) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-review"), Some(options.clone())).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    let bad = json!({"ratios": {"train": 0.9, "validation": 0.2, "test": 0.1}});
    let (status, body) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), Some(bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_error(&body, "invalid_input"));

    let (status, first) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), Some(options.clone())).await;
    assert_eq!(status, StatusCode::CREATED, "{first}");
    let lines = |name: &str| {
        first["receipt"]["files"].as_array().unwrap().iter().find(|f| f["name"] == name).unwrap()["lines"].as_u64().unwrap()
    };
    assert_eq!((lines("train.en"), lines("validation.en"), lines("test.ga")), (8, 1, 1));
    let (_, second) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), Some(options)).await;
    assert_ne!(first["id"], second["id"]);
    assert_eq!(first["receipt"]["manifest_fingerprint"], second["receipt"]["manifest_fingerprint"]);

    let id = first["id"].as_str().unwrap();
    let (status, fetched) = s.call("GET", &format!("/api/exports/{id}"), Some("tok-contrib"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched, first);
    let url = format!("{}/api/exports/{id}/files/train.ga", s.base);
    let a = s.http.get(&url).bearer_auth("tok-coord").send().await.unwrap().bytes().await.unwrap();
    let b = s.http.get(&url).bearer_auth("tok-coord").send().await.unwrap().bytes().await.unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 8);
    let (status, _) = s.call("GET", &format!("/api/exports/{id}/files/..%2Fevents.jsonl"), Some("tok-coord"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = s.call("GET", "/api/exports/exp-999", Some("tok-coord"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn export_dedup_covers_imported_duplicates() {
    let s = Server::start().await;
    let pair: LanguagePair = "en-ga".parse().unwrap();
    let mut segments: Vec<Segment> = (0..8)
        .map(|i| {
            Segment::new(format!("imp:{i}"), pair.clone(), &format!("evacuation route {i}"), &format!("bealach aslonnaithe {i}"))
                .unwrap()
                .with_status(ReviewStatus::Accepted)
                .with_phase(CrisisPhase::CustomGpt)
        })
        .collect();
    for i in 0..2 {
        let mut dup = segments[i].clone();
        dup.id = format!("imp:dup{i}");
        dup.source_text = dup.source_text.to_uppercase();
        segments.push(dup);
    }
    assert_eq!(s.service.import(segments).unwrap(), 10);

    let (status, body) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), Some(json!({"dedup": true, "format": "jsonl"}))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["accepted"], 10);
    assert_eq!(body["duplicates_removed"], 2);
    assert_eq!(body["receipt"]["segment_count"], 8);

    let (status, body) = s.call("POST", "/api/pairs/en-ga/exports", Some("tok-coord"), Some(json!({"dedup": false}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
}

#[tokio::test]
async fn leaderboards() {
    let s = Server::start().await;
    let (status, board) = s.call("GET", "/api/leaderboards/en-ga?reference=adaptNMT", None, None).await;
    assert_eq!(status, StatusCode::OK);
    let top = &board["rows"][0];
    assert_eq!(top["record"]["system_name"], "adaptMLLM");
    assert!((top["delta_bleu"].as_f64().unwrap() - 5.2).abs() < 1e-9);
    let bleus: Vec<f64> = board["rows"].as_array().unwrap().iter().map(|r| r["record"]["bleu"].as_f64().unwrap()).collect();
    assert_eq!(bleus, [41.2, 36.0, 32.8, 31.1, 29.7, 22.7, 20.0]);

    let (_, default_ref) = s.call("GET", "/api/leaderboards/en-ga", None, None).await;
    assert_eq!(default_ref["reference_system"], "GPT-3.5 baseline");
    let (status, md) = s.call("GET", "/api/leaderboards/mr-en?reference=oneNLP-IIITH&format=markdown", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(md.as_str().unwrap().starts_with("| System | BLEU | TER | ChrF3 |"));
    let (status, body) = s.call("GET", "/api/leaderboards/en-ga?reference=nobody", None, None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_error(&body, "invalid_reference"));
    let (status, _) = s.call("GET", "/api/leaderboards/fr-de", None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn cors_allows_configured_origin_only() {
    let s = Server::start().await;
    let preflight = |origin: &'static str| {
        s.http
            .request(reqwest::Method::OPTIONS, format!("{}/api/pairs/en-ga/segments", s.base))
            .header("Origin", origin)
            .header("Access-Control-Request-Method", "POST")
            .header("Access-Control-Request-Headers", "authorization,content-type")
            .send()
    };
    let ok = preflight("http://ui.example").await.unwrap();
    assert_eq!(ok.headers()["access-control-allow-origin"], "http://ui.example");
    let other = preflight("http://evil.example").await.unwrap();
    assert!(other.headers().get("access-control-allow-origin").is_none());
}

#[tokio::test]
async fn concurrent_duplicates_yield_one_success() {
    let s = Arc::new(Server::start().await);
    let mut tasks = Vec::new();
    for _ in 0..24 {
        let s = s.clone();
        tasks.push(tokio::spawn(async move { s.submit("Shelter in place", "Fan i do áit").await }));
    }
    let mut created = Vec::new();
    let mut conflicts = Vec::new();
    for t in tasks {
        let (status, body) = t.await.unwrap();
        match status {
            StatusCode::CREATED => created.push(body["id"].as_str().unwrap().to_owned()),
            StatusCode::CONFLICT => conflicts.push(body["existing_id"].as_str().unwrap().to_owned()),
            other => panic!("unexpected {other}"),
        }
    }
    assert_eq!(created.len(), 1);
    assert_eq!(conflicts.len(), 23);
    assert!(conflicts.iter().all(|c| c == &created[0]));
    assert_eq!(s.service.state(), s.service.replay().unwrap());
}
