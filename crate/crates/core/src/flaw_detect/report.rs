use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Group, MatchMethod, Verdict};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    /// 1-based, inclusive.
    pub line_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnFinding {
    pub cve_id: String,
    pub group: Group,
    pub verdict: Verdict,
    pub location: Location,
    pub name: String,
    pub tpl: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MatchMethod>,
    pub matched_chunks: Vec<usize>,
    pub unmatched_chunks: Vec<usize>,
    pub patch_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnReport {
    pub schema_version: u32,
    pub findings: Vec<VulnFinding>,
}

impl VulnReport {
    pub fn vulnerable(&self) -> impl Iterator<Item = &VulnFinding> {
        self.findings.iter().filter(|f| f.verdict == Verdict::Vulnerable)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        if self.findings.is_empty() {
            return "no findings\n".to_string();
        }
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(
                out,
                "{:<16} {:?} {:<10} {}:{}-{} {} ({} {}) {}",
                f.cve_id,
                f.group,
                format!("{:?}", f.verdict),
                f.location.file,
                f.location.line_span.0,
                f.location.line_span.1,
                f.name,
                f.tpl,
                f.version,
                f.patch_url.as_deref().unwrap_or("-"),
            );
        }
        out
    }
}

/// Sort findings by file, line, then CVE and wrap them in a report.
pub fn generate_report(mut findings: Vec<VulnFinding>) -> VulnReport {
    findings.sort_by(|a, b| {
        (&a.location, &a.cve_id, &a.tpl, &a.version, &a.name).cmp(&(&b.location, &b.cve_id, &b.tpl, &b.version, &b.name))
    });
    findings.dedup();
    VulnReport { schema_version: REPORT_SCHEMA_VERSION, findings }
}

/// 2 if anything is vulnerable, else 0.
pub fn exit_code(report: &VulnReport) -> i32 {
    if report.vulnerable().next().is_some() {
        2
    } else {
        0
    }
}
