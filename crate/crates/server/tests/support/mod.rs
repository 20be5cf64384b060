#![allow(dead_code)]

use std::path::Path;
use std::time::Duration;

use ontoforge_core::collab::RetryPolicy;
use ontoforge_server::auth::Credentials;
use ontoforge_server::{AppState, Server, ServerConfig};
use reqwest::StatusCode;
use serde_json::Value;
use tempfile::TempDir;

pub const AIR: &str = include_str!("../../../core/tests/fixtures/air.ofn");
pub const FLEET: &str = include_str!("../../../core/tests/fixtures/fleet.ofn");
pub const AIR_NS: &str = "http://example.org/air#";

pub fn air(local: &str) -> String {
    format!("{AIR_NS}{local}")
}

pub const USERS: [(&str, &str); 5] =
    [("tok-alice", "alice"), ("tok-bob", "bob"), ("tok-carol", "carol"), ("tok-vic", "vic"), ("tok-mallory", "mallory")];

pub struct TestServer {
    pub base: String,
    pub state: AppState,
    pub dir: TempDir,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl TestServer {
    pub async fn start() -> TestServer {
        TestServer::start_in(tempfile::tempdir().unwrap()).await
    }

    pub async fn start_in(dir: TempDir) -> TestServer {
        TestServer::start_with(dir, RetryPolicy::immediate(2)).await
    }

    pub async fn start_with(dir: TempDir, retry: RetryPolicy) -> TestServer {
        let mut config = ServerConfig::new(dir.path(), Credentials::from_pairs(USERS));
        config.retry = retry;
        config.webhook_timeout = Duration::from_secs(2);
        let (addr, state, task) = Server::bind(config).await.unwrap().spawn();
        TestServer { base: format!("http://{addr}"), state, dir, task }
    }

    pub fn client(&self, token: &str) -> Client {
        Client { http: reqwest::Client::new(), base: self.base.clone(), token: Some(token.to_owned()) }
    }

    pub fn anonymous(&self) -> Client {
        Client { http: reqwest::Client::new(), base: self.base.clone(), token: None }
    }

    /// Stops serving and hands back the data directory.
    pub fn stop(self) -> TempDir {
        self.task.abort();
        self.dir
    }

    pub fn data_dir(&self) -> &Path {
        self.dir.path()
    }
}

#[derive(Clone)]
pub struct Client {
    pub http: reqwest::Client,
    pub base: String,
    pub token: Option<String>,
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

impl Client {
    fn request(&self, method: reqwest::Method, path: &str) -> reqwest::RequestBuilder {
        let req = self.http.request(method, format!("{}{}", self.base, path));
        match &self.token {
            Some(t) => req.bearer_auth(t),
            None => req,
        }
    }

    async fn send(req: reqwest::RequestBuilder) -> Reply {
        let resp = req.send().await.unwrap();
        let status = resp.status();
        Reply { status, text: resp.text().await.unwrap() }
    }

    pub async fn get(&self, path: &str) -> Reply {
        Client::send(self.request(reqwest::Method::GET, path)).await
    }

    pub async fn bytes(&self, path: &str) -> (StatusCode, Vec<u8>) {
        let resp = self.request(reqwest::Method::GET, path).send().await.unwrap();
        (resp.status(), resp.bytes().await.unwrap().to_vec())
    }

    pub async fn post(&self, path: &str, body: &Value) -> Reply {
        Client::send(self.request(reqwest::Method::POST, path).header("content-type", "application/json").body(body.to_string())).await
    }

    pub async fn post_raw(&self, path: &str, body: &str) -> Reply {
        Client::send(self.request(reqwest::Method::POST, path).body(body.to_owned())).await
    }

    pub async fn put_raw(&self, path: &str, body: &str) -> Reply {
        Client::send(self.request(reqwest::Method::PUT, path).body(body.to_owned())).await
    }

    pub async fn delete(&self, path: &str) -> Reply {
        Client::send(self.request(reqwest::Method::DELETE, path)).await
    }

    /// Creates a project and returns its id.
    pub async fn create_project(&self, name: &str, ontology: &str) -> String {
        let r = self.post("/api/projects", &serde_json::json!({ "name": name, "ontology": ontology })).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        r.json()["id"].as_str().unwrap().to_owned()
    }

    pub async fn set_role(&self, project: &str, user: &str, role: &str) {
        let r = self.post(&format!("/api/projects/{project}/participants"), &serde_json::json!({ "user": user, "role": role })).await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    }

    pub async fn events(&self, project: &str, since: Option<u64>) -> EventReader {
        let mut path = format!("/api/projects/{project}/events");
        if let Some(n) = since {
            path.push_str(&format!("?since={n}"));
        }
        let resp = self.request(reqwest::Method::GET, &path).send().await.unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        EventReader { resp, buf: String::new() }
    }
}

pub fn query_value(s: &str) -> String {
    form_urlencoded::byte_serialize(s.as_bytes()).collect()
}

/// One parsed server-sent event.
#[derive(Debug, Clone, PartialEq)]
pub struct SseEvent {
    pub event: String,
    pub data: String,
    pub id: Option<String>,
}

pub struct EventReader {
    resp: reqwest::Response,
    buf: String,
}

impl EventReader {
    /// The next event, or `None` if none arrives within `wait`.
    pub async fn next(&mut self, wait: Duration) -> Option<SseEvent> {
        let deadline = tokio::time::Instant::now() + wait;
        loop {
            while let Some(end) = self.buf.find("\n\n") {
                let block: String = self.buf.drain(..end + 2).collect();
                let mut ev = SseEvent { event: "message".into(), data: String::new(), id: None };
                let mut any = false;
                for line in block.lines() {
                    if let Some(v) = line.strip_prefix("event:") {
                        ev.event = v.trim_start().to_owned();
                        any = true;
                    } else if let Some(v) = line.strip_prefix("data:") {
                        if !ev.data.is_empty() {
                            ev.data.push('\n');
                        }
                        ev.data.push_str(v.strip_prefix(' ').unwrap_or(v));
                        any = true;
                    } else if let Some(v) = line.strip_prefix("id:") {
                        ev.id = Some(v.trim_start().to_owned());
                    }
                }
                if any {
                    return Some(ev);
                }
            }
            let chunk = tokio::time::timeout_at(deadline, self.resp.chunk()).await.ok()?.ok()??;
            self.buf.push_str(&String::from_utf8_lossy(&chunk));
        }
    }
}

/// One request received by a [`Sink`].
#[derive(Debug, Clone)]
pub struct Hit {
    pub path: String,
    pub content_type: Option<String>,
    pub body: String,
}

#[derive(Clone, Default)]
struct SinkState {
    hits: std::sync::Arc<std::sync::Mutex<Vec<Hit>>>,
    failures: std::sync::Arc<std::sync::atomic::AtomicUsize>,
}

/// A local HTTP endpoint that records every request. The first
/// `fail_first` requests are answered with 500.
pub struct Sink {
    pub base: String,
    state: SinkState,
}

async fn record(
    axum::extract::State(state): axum::extract::State<SinkState>,
    uri: axum::http::Uri,
    headers: axum::http::HeaderMap,
    body: String,
) -> axum::http::StatusCode {
    let content_type = headers.get("content-type").and_then(|v| v.to_str().ok()).map(str::to_owned);
    state.hits.lock().unwrap().push(Hit { path: uri.path().to_owned(), content_type, body });
    let failing = state
        .failures
        .fetch_update(std::sync::atomic::Ordering::SeqCst, std::sync::atomic::Ordering::SeqCst, |n| n.checked_sub(1))
        .is_ok();
    if failing {
        axum::http::StatusCode::INTERNAL_SERVER_ERROR
    } else {
        axum::http::StatusCode::OK
    }
}

impl Sink {
    pub async fn start(fail_first: usize) -> Sink {
        let state = SinkState::default();
        state.failures.store(fail_first, std::sync::atomic::Ordering::SeqCst);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let app = axum::Router::new().fallback(record).with_state(state.clone());
        tokio::spawn(async move { axum::serve(listener, app).await });
        Sink { base, state }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub fn hits(&self, path: &str) -> Vec<Hit> {
        self.state.hits.lock().unwrap().iter().filter(|h| h.path == path).cloned().collect()
    }

    /// Waits until `path` has at least `n` hits, then a little longer to
    /// catch duplicates.
    pub async fn settle(&self, path: &str, n: usize, wait: Duration) -> Vec<Hit> {
        let deadline = tokio::time::Instant::now() + wait;
        while self.hits(path).len() < n && tokio::time::Instant::now() < deadline {
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
        tokio::time::sleep(Duration::from_millis(300)).await;
        self.hits(path)
    }
}
