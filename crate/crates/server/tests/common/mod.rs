#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use postedit_core::RetrievalConfig;
use postedit_server::{api, Workbench};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub struct Client {
    pub router: Router,
    pub workbench: Arc<Workbench>,
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
}

impl Client {
    pub fn open(dir: &Path) -> Client {
        let workbench = Arc::new(Workbench::open(dir, RetrievalConfig::default()).unwrap());
        Client {
            router: api::router(workbench.clone()),
            workbench,
        }
    }

    pub async fn send(&self, method: Method, uri: &str, body: impl Into<Body>, content_type: &str) -> Reply {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", content_type)
            .body(body.into())
            .unwrap();
        let res = self.router.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let content_type = res
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string());
        let body = to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec();
        Reply {
            status,
            content_type,
            body,
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, Body::empty(), "text/plain").await
    }

    pub async fn post_json(&self, uri: &str, body: Value) -> Reply {
        self.send(Method::POST, uri, body.to_string(), "application/json").await
    }

    pub async fn post_text(&self, uri: &str, body: &str) -> Reply {
        self.send(Method::POST, uri, body.to_string(), "text/plain; charset=utf-8").await
    }

    /// Project with the sample segments, TM, MT and APE loaded.
    pub async fn sample_project(&self, name: &str) -> String {
        let r = self
            .post_json("/projects", json!({"name": name, "sourceLang": "en", "targetLang": "de"}))
            .await;
        assert_eq!(r.status, StatusCode::CREATED);
        let id = r.json()["projectId"].as_str().unwrap().to_string();
        let segments: Vec<Value> = fixture_text("sample_segments.tsv")
            .lines()
            .map(|l| {
                let (id, text) = l.split_once('\t').unwrap();
                json!({"id": id, "text": text})
            })
            .collect();
        let r = self
            .post_json(&format!("/projects/{id}/segments"), json!({ "segments": segments }))
            .await;
        assert_eq!(r.status, StatusCode::OK);
        let r = self.post_text(&format!("/projects/{id}/tm"), &fixture_text("sample_tm.tsv")).await;
        assert_eq!(r.status, StatusCode::OK);
        for origin in ["mt", "ape"] {
            let file = format!("sample_{origin}.tsv");
            let r = self
                .post_text(&format!("/projects/{id}/external/{origin}"), &fixture_text(&file))
                .await;
            assert_eq!(r.status, StatusCode::OK);
        }
        id
    }

    pub async fn session(&self, project: &str, translator: &str) -> String {
        let r = self
            .post_json(&format!("/projects/{project}/sessions"), json!({ "translatorId": translator }))
            .await;
        assert_eq!(r.status, StatusCode::CREATED);
        r.json()["sessionId"].as_str().unwrap().to_string()
    }
}

pub fn postedit(segment: &str, origin: &str, initial: &str, fin: &str, start_s: i64, dur_ms: i64) -> Value {
    let start = chrono::DateTime::from_timestamp(1_700_000_000 + start_s, 0).unwrap();
    let end = start + chrono::Duration::milliseconds(dur_ms);
    json!({
        "segmentId": segment,
        "origin": origin,
        "initialText": initial,
        "finalText": fin,
        "startedAt": start,
        "finishedAt": end,
    })
}

/// A `postedit serve` child process on an ephemeral port.
pub struct Server {
    child: std::process::Child,
    pub addr: std::net::SocketAddr,
}

impl Server {
    pub fn start(data: &Path) -> Server {
        use std::io::{BufRead, BufReader};
        use std::process::{Command, Stdio};

        let mut child = Command::new(env!("CARGO_BIN_EXE_postedit"))
            .args(["serve", "--listen", "127.0.0.1:0", "--data"])
            .arg(data)
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut stderr = BufReader::new(child.stderr.take().unwrap());
        let mut line = String::new();
        stderr.read_line(&mut line).unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected server output: {line}"))
            .parse()
            .unwrap();
        // Keep draining so the child never blocks on a full pipe.
        std::thread::spawn(move || std::io::copy(&mut stderr, &mut std::io::sink()));
        Server { child, addr }
    }

    /// Hard stop, no chance to flush anything.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }

    pub fn request(&self, method: &str, path: &str, content_type: &str, body: &[u8]) -> (u16, Vec<u8>) {
        http(self.addr, method, path, content_type, body)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Minimal HTTP/1.1 client: one request per connection.
pub fn http(addr: std::net::SocketAddr, method: &str, path: &str, content_type: &str, body: &[u8]) -> (u16, Vec<u8>) {
    use std::io::{Read, Write};

    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    let head = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).unwrap();
    stream.write_all(body).unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();

    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").expect("response head");
    let head = String::from_utf8_lossy(&raw[..split]).to_lowercase();
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    let mut rest = &raw[split + 4..];
    if !head.contains("transfer-encoding: chunked") {
        return (status, rest.to_vec());
    }
    let mut body = Vec::new();
    loop {
        let eol = rest.windows(2).position(|w| w == b"\r\n").unwrap();
        let size = usize::from_str_radix(std::str::from_utf8(&rest[..eol]).unwrap().trim(), 16).unwrap();
        rest = &rest[eol + 2..];
        if size == 0 {
            break;
        }
        body.extend_from_slice(&rest[..size]);
        rest = &rest[size + 2..];
    }
    (status, body)
}
