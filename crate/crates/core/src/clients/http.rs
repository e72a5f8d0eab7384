//! Minimal HTTP layer shared by the advisory and oracle clients, with
//! record/replay and offline backends for hermetic runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ClientError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GET")]
    Get,
    #[serde(rename = "POST")]
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Option<String>,
}

impl HttpRequest {
    pub fn get(url: impl Into<String>) -> Self {
        Self { method: Method::Get, url: url.into(), headers: Vec::new(), body: None }
    }

    pub fn post_json(url: impl Into<String>, body: String) -> Self {
        Self {
            method: Method::Post,
            url: url.into(),
            headers: vec![("content-type".into(), "application/json".into())],
            body: Some(body),
        }
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.to_string(), value.to_string()));
        self
    }

    /// Stable key for record/replay. Headers are left out so that secrets
    /// never influence file names.
    pub fn replay_key(&self) -> String {
        let mut h = Sha256::new();
        h.update(match self.method {
            Method::Get => "GET ",
            Method::Post => "POST ",
        });
        h.update(self.url.as_bytes());
        h.update(b"\n");
        h.update(self.body.as_deref().unwrap_or("").as_bytes());
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait HttpTransport: Send + Sync {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError>;
}

impl<T: HttpTransport + ?Sized> HttpTransport for std::sync::Arc<T> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        (**self).send(request)
    }
}

/// Live transport.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, ClientError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .user_agent(concat!("vulture/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| ClientError::Network(e.to_string()))?;
        Ok(Self { client })
    }
}

impl HttpTransport for ReqwestTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        let mut builder = match request.method {
            Method::Get => self.client.get(&request.url),
            Method::Post => self.client.post(&request.url),
        };
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        if let Some(body) = &request.body {
            builder = builder.body(body.clone());
        }
        let resp = builder.send().map_err(|e| ClientError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| ClientError::Network(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// Refuses every request and counts the attempts.
#[derive(Debug, Default)]
pub struct OfflineTransport {
    attempts: AtomicUsize,
}

impl OfflineTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl HttpTransport for OfflineTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(ClientError::Offline(request.url.clone()))
    }
}

/// A recorded exchange, stored as `<replay_key>.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recording {
    pub method: Method,
    pub url: String,
    pub status: u16,
    pub body: String,
}

/// Serves responses from recordings on disk; never touches the network.
#[derive(Debug)]
pub struct ReplayTransport {
    recordings: BTreeMap<String, Recording>,
    served: AtomicUsize,
}

impl ReplayTransport {
    pub fn open(dir: &Path) -> Result<Self, ClientError> {
        let mut recordings = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| ClientError::Io(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| ClientError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| ClientError::Io(format!("{}: {e}", path.display())))?;
            let rec: Recording = serde_json::from_str(&text)
                .map_err(|e| ClientError::Io(format!("bad recording {}: {e}", path.display())))?;
            let key = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            recordings.insert(key, rec);
        }
        Ok(Self { recordings, served: AtomicUsize::new(0) })
    }

    pub fn served(&self) -> usize {
        self.served.load(Ordering::SeqCst)
    }
}

impl HttpTransport for ReplayTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        let rec = self
            .recordings
            .get(&request.replay_key())
            .ok_or_else(|| ClientError::Offline(format!("no recording for {}", request.url)))?;
        self.served.fetch_add(1, Ordering::SeqCst);
        Ok(HttpResponse { status: rec.status, body: rec.body.clone() })
    }
}

/// Forwards to another transport and writes every exchange as a recording.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
    lock: Mutex<()>,
}

impl<T: HttpTransport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into(), lock: Mutex::new(()) }
    }
}

impl<T: HttpTransport> HttpTransport for RecordingTransport<T> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        let resp = self.inner.send(request)?;
        let rec = Recording { method: request.method, url: request.url.clone(), status: resp.status, body: resp.body.clone() };
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        std::fs::create_dir_all(&self.dir).map_err(|e| ClientError::Io(e.to_string()))?;
        let path = self.dir.join(format!("{}.json", request.replay_key()));
        let text = serde_json::to_string_pretty(&rec).map_err(|e| ClientError::Io(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| ClientError::Io(format!("{}: {e}", path.display())))?;
        Ok(resp)
    }
}

/// Retry schedule for rate-limited or transiently failing requests.
#[derive(Debug, Clone, Copy)]
pub struct Backoff {
    pub base: Duration,
    pub factor: u32,
    pub max_attempts: u32,
    pub sleep: fn(Duration),
}

impl Default for Backoff {
    fn default() -> Self {
        Self { base: Duration::from_secs(1), factor: 2, max_attempts: 5, sleep: std::thread::sleep }
    }
}

impl Backoff {
    /// Send `request`, retrying on 429 and 5xx responses. Transport errors
    /// other than network failures are returned immediately.
    pub fn send(&self, transport: &dyn HttpTransport, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        let mut delay = self.base;
        let mut last = ClientError::RateLimited(0);
        for attempt in 1..=self.max_attempts {
            match transport.send(request) {
                Ok(resp) if resp.status == 429 || resp.status >= 500 => {
                    last = if resp.status == 429 {
                        ClientError::RateLimited(attempt)
                    } else {
                        ClientError::Network(format!("HTTP {} from {}", resp.status, request.url))
                    };
                }
                Ok(resp) => return Ok(resp),
                Err(ClientError::Network(msg)) => last = ClientError::Network(msg),
                Err(other) => return Err(other),
            }
            if attempt < self.max_attempts {
                (self.sleep)(delay);
                delay *= self.factor;
            }
        }
        Err(last)
    }
}
