//! JSON-Lines component segment. After the header come, per library
//! version, one version line followed by its fingerprint lines:
//!
//! ```text
//! {"schema_version":1,"segment":"component"}
//! {"tpl":"zlib","version":"v1.2.11","published":"2017-01-15T17:57:00Z"}
//! {"tpl":"zlib","version":"v1.2.11","digest":"…","birth":"1995-05-01T00:00:00Z","path":"adler32.c"}
//! ```

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ComponentDbError, ComponentSegment, FunctionFingerprint, TplVersionRecord};
use crate::code_model::FuzzyDigest;

pub const SCHEMA_VERSION: u64 = 1;
const SEGMENT_KIND: &str = "component";

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u64,
    segment: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VersionLine {
    tpl: String,
    version: String,
    published: DateTime<Utc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FingerprintLine {
    tpl: String,
    version: String,
    digest: FuzzyDigest,
    birth: DateTime<Utc>,
    path: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Fingerprint(FingerprintLine),
    Version(VersionLine),
}

fn line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("segment lines always serialize"));
    out.push('\n');
}

pub fn to_jsonl(segment: &ComponentSegment) -> String {
    let mut out = String::new();
    line(&mut out, &Header { schema_version: SCHEMA_VERSION, segment: SEGMENT_KIND.into() });
    for r in segment.records() {
        line(&mut out, &VersionLine { tpl: r.tpl_name.clone(), version: r.version_tag.clone(), published: r.publish_time });
        for fp in &r.fc {
            line(
                &mut out,
                &FingerprintLine {
                    tpl: fp.origin_tpl.clone(),
                    version: r.version_tag.clone(),
                    digest: fp.h.clone(),
                    birth: fp.birth,
                    path: fp.origin_path.clone(),
                },
            );
        }
    }
    out
}

pub fn persist(segment: &ComponentSegment, path: &Path) -> Result<(), ComponentDbError> {
    let io = |e: std::io::Error| ComponentDbError::Io(format!("{}: {e}", path.display()));
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(to_jsonl(segment).as_bytes()).map_err(io)?;
    file.sync_all().map_err(io)
}

pub fn load(path: &Path) -> Result<ComponentSegment, ComponentDbError> {
    let text = std::fs::read_to_string(path).map_err(|e| ComponentDbError::Io(format!("{}: {e}", path.display())))?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<ComponentSegment, ComponentDbError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let malformed = |line: usize, message: String| ComponentDbError::Malformed { line: line + 1, message };

    let (no, first) = lines.next().ok_or_else(|| malformed(0, "missing header".into()))?;
    let header: serde_json::Value = serde_json::from_str(first).map_err(|e| malformed(no, e.to_string()))?;
    let found = header.get("schema_version").and_then(|v| v.as_u64()).ok_or_else(|| malformed(no, "header without schema_version".into()))?;
    if found != SCHEMA_VERSION {
        return Err(ComponentDbError::SchemaVersionMismatch { found });
    }
    if header.get("segment").and_then(|v| v.as_str()) != Some(SEGMENT_KIND) {
        return Err(malformed(no, "not a component segment".into()));
    }

    let mut records: Vec<TplVersionRecord> = Vec::new();
    for (no, text) in lines {
        match serde_json::from_str::<Line>(text).map_err(|e| malformed(no, e.to_string()))? {
            Line::Version(v) => records.push(TplVersionRecord { tpl_name: v.tpl, version_tag: v.version, publish_time: v.published, fc: Vec::new() }),
            Line::Fingerprint(f) => {
                let current = records
                    .last_mut()
                    .filter(|r| r.version_tag == f.version && r.tpl_name == f.tpl)
                    .ok_or_else(|| malformed(no, format!("fingerprint for {}@{} outside its version block", f.tpl, f.version)))?;
                current.fc.push(FunctionFingerprint { h: f.digest, birth: f.birth, origin_tpl: f.tpl, origin_path: f.path });
            }
        }
    }

    let mut segment = ComponentSegment::default();
    for r in records {
        segment.tpls.entry(r.tpl_name.clone()).or_default().push(r);
    }
    segment.rebuild_index();
    Ok(segment)
}
