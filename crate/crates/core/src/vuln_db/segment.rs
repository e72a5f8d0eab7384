//! JSON-Lines vulnerability segment: a header line, then one CVE record per
//! line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CveRecord, VulnDbError};

pub const SCHEMA_VERSION: u64 = 1;
const SEGMENT_KIND: &str = "vulnerability";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VulnSegment {
    pub records: Vec<CveRecord>,
}

impl VulnSegment {
    /// Records of `tpl` that list `version` as vulnerable.
    pub fn affecting<'a>(&'a self, tpl: &'a str, version: &'a str) -> impl Iterator<Item = &'a CveRecord> + 'a {
        self.records.iter().filter(move |r| r.tpl == tpl && r.affects(version))
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u64,
    segment: String,
}

pub fn to_jsonl(segment: &VulnSegment) -> String {
    let mut out = serde_json::to_string(&Header { schema_version: SCHEMA_VERSION, segment: SEGMENT_KIND.into() }).expect("header serializes");
    out.push('\n');
    for r in &segment.records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn persist(segment: &VulnSegment, path: &Path) -> Result<(), VulnDbError> {
    std::fs::write(path, to_jsonl(segment)).map_err(|e| VulnDbError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<VulnSegment, VulnDbError> {
    let text = std::fs::read_to_string(path).map_err(|e| VulnDbError::Io(format!("{}: {e}", path.display())))?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<VulnSegment, VulnDbError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let malformed = |line: usize, message: String| VulnDbError::Malformed { line: line + 1, message };
    let (no, first) = lines.next().ok_or_else(|| malformed(0, "missing header".into()))?;
    let header: serde_json::Value = serde_json::from_str(first).map_err(|e| malformed(no, e.to_string()))?;
    let found = header.get("schema_version").and_then(|v| v.as_u64()).ok_or_else(|| malformed(no, "header without schema_version".into()))?;
    if found != SCHEMA_VERSION {
        return Err(VulnDbError::SchemaVersionMismatch { found });
    }
    if header.get("segment").and_then(|v| v.as_str()) != Some(SEGMENT_KIND) {
        return Err(malformed(no, "not a vulnerability segment".into()));
    }
    let mut segment = VulnSegment::default();
    for (no, line) in lines {
        segment.records.push(serde_json::from_str(line).map_err(|e| malformed(no, e.to_string()))?);
    }
    Ok(segment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::VulnerableElements;
    use crate::flaw_detect::PatchScope;

    #[test]
    fn round_trip() {
        let seg = VulnSegment {
            records: vec![CveRecord {
                cve_id: "CVE-2013-4080".into(),
                tpl: "wireshark".into(),
                description: "d".into(),
                cpes: vec![],
                vulnerable_elements: VulnerableElements::default(),
                vulnerable_versions: vec!["1.8.7".into()],
                fixed_version: Some("1.8.8".into()),
                patch_commit: None,
                patch_url: None,
                reason: Some(super::super::UnmappedReason::NoElements),
                patch_scope: PatchScope::default(),
            }],
        };
        let text = to_jsonl(&seg);
        assert!(text.starts_with("{\"schema_version\":1,\"segment\":\"vulnerability\"}\n"));
        assert!(text.contains("\"reason\":\"no-elements\""));
        assert_eq!(load_str(&text).unwrap(), seg);
        assert_eq!(load_str(&to_jsonl(&VulnSegment::default())).unwrap(), VulnSegment::default());
        assert!(matches!(load_str("{\"schema_version\":9,\"segment\":\"vulnerability\"}"), Err(VulnDbError::SchemaVersionMismatch { found: 9 })));
    }
}
