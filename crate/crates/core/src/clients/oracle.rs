//! Description and relevance oracles. The rule-based implementations are
//! deterministic; the chat adapter talks to an OpenAI-style completion API
//! and defers to the rules whenever it cannot answer.

use std::collections::BTreeSet;
use std::sync::{Arc, LazyLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::http::{Backoff, HttpRequest, HttpTransport};
use super::ClientError;

/// Code elements named by a vulnerability description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerableElements {
    pub files: BTreeSet<String>,
    pub functions: BTreeSet<String>,
    pub variables: BTreeSet<String>,
}

impl VulnerableElements {
    pub fn is_empty(&self) -> bool {
        self.files.is_empty() && self.functions.is_empty() && self.variables.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub cve_id: String,
    pub cve_description: String,
    pub commit_message: String,
    pub modified_code: String,
    /// Function names parsed from the description.
    #[serde(default)]
    pub vulnerable_functions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub relevant: bool,
    pub rationale: String,
}

pub trait DescriptionOracle: Send + Sync {
    fn extract(&self, description: &str) -> Result<VulnerableElements, ClientError>;
}

pub trait RelevanceOracle: Send + Sync {
    fn judge(&self, request: &OracleRequest) -> Result<OracleResponse, ClientError>;
}

static FILE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[A-Za-z0-9_./\\-]*[A-Za-z0-9_-]\.(?:c|h|cc|cpp|cxx|hpp)\b").unwrap());
static FUNC_AFTER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b([A-Za-z_][A-Za-z0-9_]*)(?:\s*\(\)|\s+(?:function|method|routine)s?\b)").unwrap());
static FUNC_BEFORE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(?:function|method|routine)\s+([A-Za-z_][A-Za-z0-9_]*)").unwrap());
static VAR_AFTER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b([A-Za-z_][A-Za-z0-9_]*)\s+(?:variable|field|member|parameter|argument|buffer|array)s?\b").unwrap()
});
static VAR_BEFORE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:variable|field|member|parameter|argument)\s+([A-Za-z_][A-Za-z0-9_]*)").unwrap()
});

/// Only words that look like code identifiers count: an underscore, an
/// inner capital, or a digit after a letter.
fn looks_like_identifier(word: &str) -> bool {
    let b = word.as_bytes();
    word.contains('_')
        || b.windows(2).any(|w| w[0].is_ascii_lowercase() && w[1].is_ascii_uppercase())
        || b.windows(2).any(|w| w[0].is_ascii_alphabetic() && w[1].is_ascii_digit())
}

/// Rule-based oracle: pattern extraction for descriptions, keyword rules for
/// relevance.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleOracle;

pub const SECURITY_KEYWORDS: [&str; 6] = ["fix", "overflow", "cve", "security", "vulnerability", "dos"];

impl DescriptionOracle for RuleOracle {
    fn extract(&self, description: &str) -> Result<VulnerableElements, ClientError> {
        let mut el = VulnerableElements::default();
        for m in FILE_RE.find_iter(description) {
            let name = m.as_str().rsplit(['/', '\\']).next().unwrap_or(m.as_str());
            el.files.insert(name.to_string());
        }
        // `foo()` is a function even without underscores.
        for c in FUNC_AFTER_RE.captures_iter(description) {
            let word = &c[1];
            if c[0].ends_with("()") || looks_like_identifier(word) {
                el.functions.insert(word.to_string());
            }
        }
        for c in FUNC_BEFORE_RE.captures_iter(description) {
            if looks_like_identifier(&c[1]) {
                el.functions.insert(c[1].to_string());
            }
        }
        for re in [&*VAR_AFTER_RE, &*VAR_BEFORE_RE] {
            for c in re.captures_iter(description) {
                let word = &c[1];
                if looks_like_identifier(word) && !el.functions.contains(word) {
                    el.variables.insert(word.to_string());
                }
            }
        }
        // File names such as `packet-assa_r3.c` contain underscores too.
        el.functions.retain(|f| !el.files.iter().any(|file| file.starts_with(f.as_str())));
        el.variables.retain(|v| !el.files.iter().any(|file| file.starts_with(v.as_str())));
        Ok(el)
    }
}

impl RelevanceOracle for RuleOracle {
    fn judge(&self, req: &OracleRequest) -> Result<OracleResponse, ClientError> {
        let msg = req.commit_message.to_lowercase();
        if !req.cve_id.is_empty() && msg.contains(&req.cve_id.to_lowercase()) {
            return Ok(OracleResponse { relevant: true, rationale: format!("commit message cites {}", req.cve_id) });
        }
        let func = req.vulnerable_functions.iter().find(|f| req.commit_message.contains(f.as_str()));
        let keyword = SECURITY_KEYWORDS.iter().find(|k| msg.contains(*k));
        Ok(match (func, keyword) {
            (Some(f), Some(k)) => OracleResponse { relevant: true, rationale: format!("message names {f} with keyword `{k}`") },
            _ => OracleResponse { relevant: false, rationale: "no CVE id and no function/keyword pair in message".into() },
        })
    }
}

/// Settings for the chat-completion adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatSettings {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
}

impl ChatSettings {
    /// Read `ORACLE_ENDPOINT`, `ORACLE_MODEL` and `ORACLE_API_KEY`. Returns
    /// `None` unless an endpoint is configured.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var("ORACLE_ENDPOINT").ok().filter(|s| !s.is_empty())?;
        Some(Self {
            endpoint,
            model: std::env::var("ORACLE_MODEL").unwrap_or_else(|_| "gpt-4".into()),
            api_key: std::env::var("ORACLE_API_KEY").ok().filter(|s| !s.is_empty()),
        })
    }
}

pub struct ChatOracle {
    settings: ChatSettings,
    transport: Arc<dyn HttpTransport>,
    backoff: Backoff,
}

const DESCRIPTION_PROMPT: &str = "Extract the code elements named in this vulnerability description. \
Answer with JSON only: {\"files\":[...],\"functions\":[...],\"variables\":[...]}. Use file base names.";
const RELEVANCE_PROMPT: &str = "Decide whether the commit fixes the vulnerability. \
Answer with JSON only: {\"relevant\":true|false,\"rationale\":\"...\"}.";

impl ChatOracle {
    pub fn new(settings: ChatSettings, transport: Arc<dyn HttpTransport>) -> Self {
        Self { settings, transport, backoff: Backoff::default() }
    }

    pub fn with_backoff(mut self, backoff: Backoff) -> Self {
        self.backoff = backoff;
        self
    }

    fn ask(&self, system: &str, user: String) -> Result<Value, ClientError> {
        let body = json!({
            "model": self.settings.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut req = HttpRequest::post_json(&self.settings.endpoint, body.to_string());
        if let Some(key) = &self.settings.api_key {
            req = req.header("authorization", &format!("Bearer {key}"));
        }
        let unavailable = |e: String| ClientError::OracleUnavailable(e);
        let resp = self.backoff.send(self.transport.as_ref(), &req).map_err(|e| unavailable(e.to_string()))?;
        if resp.status != 200 {
            return Err(unavailable(format!("HTTP {}", resp.status)));
        }
        let root: Value = serde_json::from_str(&resp.body).map_err(|e| unavailable(e.to_string()))?;
        let content = root
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| unavailable("response without message content".into()))?;
        // Models like to wrap JSON in code fences.
        let trimmed = content.trim().trim_start_matches("```json").trim_start_matches("```").trim_end_matches("```");
        serde_json::from_str(trimmed.trim()).map_err(|e| unavailable(format!("unparseable answer: {e}")))
    }
}

impl DescriptionOracle for ChatOracle {
    fn extract(&self, description: &str) -> Result<VulnerableElements, ClientError> {
        let answer = self.ask(DESCRIPTION_PROMPT, description.to_string())?;
        serde_json::from_value(answer).map_err(|e| ClientError::OracleUnavailable(e.to_string()))
    }
}

impl RelevanceOracle for ChatOracle {
    fn judge(&self, req: &OracleRequest) -> Result<OracleResponse, ClientError> {
        let user = format!(
            "CVE: {}\nDescription: {}\n\nCommit message:\n{}\n\nModified code:\n{}",
            req.cve_id, req.cve_description, req.commit_message, req.modified_code
        );
        let answer = self.ask(RELEVANCE_PROMPT, user)?;
        serde_json::from_value(answer).map_err(|e| ClientError::OracleUnavailable(e.to_string()))
    }
}

/// Primary oracle with the rule oracle behind it.
pub struct WithFallback<T> {
    pub primary: Option<T>,
}

impl<T: DescriptionOracle> DescriptionOracle for WithFallback<T> {
    fn extract(&self, description: &str) -> Result<VulnerableElements, ClientError> {
        if let Some(p) = &self.primary {
            match p.extract(description) {
                Ok(el) => return Ok(el),
                Err(e) => log::warn!("description oracle failed, using rules: {e}"),
            }
        }
        RuleOracle.extract(description)
    }
}

impl<T: RelevanceOracle> RelevanceOracle for WithFallback<T> {
    fn judge(&self, req: &OracleRequest) -> Result<OracleResponse, ClientError> {
        if let Some(p) = &self.primary {
            match p.judge(req) {
                Ok(r) => return Ok(r),
                Err(e) => log::warn!("relevance oracle failed, using rules: {e}"),
            }
        }
        RuleOracle.judge(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CVE_2013_4080: &str = "The dissect_r3_upstreamcommand_queryconfig function in epan/dissectors/packet-assa_r3.c \
        in the Assa Abloy R3 dissector in Wireshark 1.8.x before 1.8.8 does not properly handle a zero-length item, \
        which allows remote attackers to cause a denial of service (infinite loop, and CPU and memory consumption) \
        via a crafted packet.";

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn wireshark_description() {
        let el = RuleOracle.extract(CVE_2013_4080).unwrap();
        assert_eq!(el.files, set(&["packet-assa_r3.c"]));
        assert_eq!(el.functions, set(&["dissect_r3_upstreamcommand_queryconfig"]));
        assert!(el.variables.is_empty());
    }

    #[test]
    fn vague_description_has_no_elements() {
        assert!(RuleOracle.extract("Unspecified vulnerability in the IEEE 802.11 dissector").unwrap().is_empty());
        assert!(RuleOracle.extract("").unwrap().is_empty());
    }

    #[test]
    fn variables_and_call_syntax() {
        let el = RuleOracle.extract("An overflow in inflate() via the strm_len field of png_read_row.").unwrap();
        assert_eq!(el.functions, set(&["inflate"]));
        assert_eq!(el.variables, set(&["strm_len"]));
    }

    #[test]
    fn relevance_rules() {
        let base = OracleRequest {
            cve_id: "CVE-2020-0001".into(),
            vulnerable_functions: vec!["parse_hdr".into()],
            ..Default::default()
        };
        let judge = |msg: &str| RuleOracle.judge(&OracleRequest { commit_message: msg.into(), ..base.clone() }).unwrap().relevant;
        assert!(judge("Merge CVE-2020-0001 fix"));
        assert!(judge("parse_hdr: fix out-of-bounds read"));
        assert!(!judge("parse_hdr: refactor"));
        assert!(!judge("fix typo in docs"));
    }
}
