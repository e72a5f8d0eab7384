//! Advisory feeds: a directory of JSON records, or the NVD CVE API queried
//! by keyword.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::http::{Backoff, HttpRequest, HttpTransport};
use super::ClientError;

pub const NVD_ENDPOINT: &str = "https://services.nvd.nist.gov/rest/json/cves/2.0";

/// One CPE applicability entry, field names as in the NVD API.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CpeMatch {
    pub criteria: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_start_including: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_start_excluding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_end_including: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_end_excluding: Option<String>,
    #[serde(default = "yes")]
    pub vulnerable: bool,
}

fn yes() -> bool {
    true
}

impl CpeMatch {
    pub fn new(criteria: impl Into<String>) -> Self {
        Self { criteria: criteria.into(), vulnerable: true, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum CpeEntry {
    Bare(String),
    Full(CpeMatch),
}

fn cpe_entries<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<CpeMatch>, D::Error> {
    let raw: Vec<CpeEntry> = Vec::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|e| match e {
            CpeEntry::Bare(s) => CpeMatch::new(s),
            CpeEntry::Full(m) => m,
        })
        .collect())
}

/// Normalized advisory record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advisory {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, deserialize_with = "cpe_entries")]
    pub cpe: Vec<CpeMatch>,
    #[serde(default)]
    pub references: Vec<String>,
    /// Version named by the advisory as the first fixed release, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_version: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdvisoryFeed {
    pub advisories: Vec<Advisory>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdvisorySource {
    NvdApi { keyword: String },
    Directory(PathBuf),
}

/// Parse one NVD 2.0 API page. Returns the records and `totalResults`.
pub fn parse_nvd_response(text: &str) -> Result<(Vec<Advisory>, usize), ClientError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ClientError::BadAdvisory(e.to_string()))?;
    let total = root.get("totalResults").and_then(Value::as_u64).unwrap_or(0) as usize;
    let vulns = root
        .get("vulnerabilities")
        .and_then(Value::as_array)
        .ok_or_else(|| ClientError::BadAdvisory("missing `vulnerabilities`".into()))?;
    let mut out = Vec::with_capacity(vulns.len());
    for v in vulns {
        let cve = v.get("cve").unwrap_or(v);
        out.push(advisory_from_nvd(cve)?);
    }
    Ok((out, total))
}

fn advisory_from_nvd(cve: &Value) -> Result<Advisory, ClientError> {
    let id = cve
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| ClientError::BadAdvisory("record without `id`".into()))?
        .to_string();
    let description = cve
        .get("descriptions")
        .and_then(Value::as_array)
        .and_then(|ds| {
            ds.iter()
                .find(|d| d.get("lang").and_then(Value::as_str) == Some("en"))
                .or_else(|| ds.first())
        })
        .and_then(|d| d.get("value"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let mut cpe = Vec::new();
    for config in cve.get("configurations").and_then(Value::as_array).into_iter().flatten() {
        for node in config.get("nodes").and_then(Value::as_array).into_iter().flatten() {
            for m in node.get("cpeMatch").and_then(Value::as_array).into_iter().flatten() {
                let m: CpeMatch = serde_json::from_value(m.clone()).map_err(|e| ClientError::BadAdvisory(format!("{id}: {e}")))?;
                cpe.push(m);
            }
        }
    }
    let references = cve
        .get("references")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(|r| r.get("url").and_then(Value::as_str).map(String::from))
        .collect();
    Ok(Advisory { id, description, cpe, references, fixed_version: None })
}

/// Read every `*.json` file of `dir` in name order. A file holds one
/// advisory, an array of them, or an NVD API response. Malformed files are
/// skipped with a warning.
pub fn read_directory(dir: &Path) -> Result<AdvisoryFeed, ClientError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ClientError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    let mut feed = AdvisoryFeed::default();
    for path in paths {
        match read_file(&path) {
            Ok(mut records) => feed.advisories.append(&mut records),
            Err(e) => {
                log::warn!("skipping advisory file {}: {e}", path.display());
                feed.warnings.push(format!("{}: {e}", path.display()));
            }
        }
    }
    Ok(feed)
}

fn read_file(path: &Path) -> Result<Vec<Advisory>, ClientError> {
    let text = std::fs::read_to_string(path).map_err(|e| ClientError::Io(e.to_string()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| ClientError::BadAdvisory(e.to_string()))?;
    if value.get("vulnerabilities").is_some() {
        return parse_nvd_response(&text).map(|(v, _)| v);
    }
    let parse = |v: Value| serde_json::from_value::<Advisory>(v).map_err(|e| ClientError::BadAdvisory(e.to_string()));
    match value {
        Value::Array(items) => items.into_iter().map(parse).collect(),
        other => Ok(vec![parse(other)?]),
    }
}

/// Keyword search against the NVD API.
pub struct NvdClient {
    transport: Arc<dyn HttpTransport>,
    pub endpoint: String,
    pub api_key: Option<String>,
    pub page_size: usize,
    pub backoff: Backoff,
}

impl NvdClient {
    pub fn new(transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            transport,
            endpoint: NVD_ENDPOINT.to_string(),
            api_key: std::env::var("NVD_API_KEY").ok().filter(|k| !k.is_empty()),
            page_size: 2000,
            backoff: Backoff::default(),
        }
    }

    pub fn page_url(&self, keyword: &str, start: usize) -> String {
        let kw: String = keyword
            .bytes()
            .map(|b| match b {
                b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
                b' ' => "%20".to_string(),
                _ => format!("%{b:02X}"),
            })
            .collect();
        format!("{}?keywordSearch={kw}&resultsPerPage={}&startIndex={start}", self.endpoint, self.page_size)
    }

    pub fn search(&self, keyword: &str) -> Result<Vec<Advisory>, ClientError> {
        let mut out = Vec::new();
        loop {
            let mut req = HttpRequest::get(self.page_url(keyword, out.len()));
            if let Some(key) = &self.api_key {
                req = req.header("apiKey", key);
            }
            let resp = self.backoff.send(self.transport.as_ref(), &req)?;
            if resp.status != 200 {
                return Err(ClientError::Network(format!("HTTP {} from {}", resp.status, req.url)));
            }
            let (mut page, total) = parse_nvd_response(&resp.body)?;
            let got = page.len();
            out.append(&mut page);
            if got == 0 || out.len() >= total {
                return Ok(out);
            }
        }
    }
}

pub fn fetch_advisories(source: &AdvisorySource, transport: Arc<dyn HttpTransport>) -> Result<AdvisoryFeed, ClientError> {
    match source {
        AdvisorySource::Directory(dir) => read_directory(dir),
        AdvisorySource::NvdApi { keyword } => {
            let advisories = NvdClient::new(transport).search(keyword)?;
            Ok(AdvisoryFeed { advisories, warnings: Vec::new() })
        }
    }
}
