//! Vulnerability database: advisory matching against library versions and
//! the multi-slice search that maps a CVE to its patch commit.

pub mod cpe;
mod mapping;
mod segment;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clients::{Advisory, ClientError, DescriptionOracle, VulnerableElements};
use crate::flaw_detect::PatchScope;

pub use cpe::{CpeConstraint, CpeForm, VersionBound};
pub use mapping::{
    confirm_patch_commit, diff_touches, filter_candidate_slices, map_patch_commit, select_candidate_commits, slice_commits,
    CommitSlice, MapOptions, MappingTrace,
};
pub use segment::{load, load_str, persist, to_jsonl, VulnSegment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VulnDbError {
    #[error("{0}: unparseable CPE")]
    UnparseableCpe(String),
    #[error("no commits in the patch window")]
    EmptyRange,
    #[error("description names no code elements")]
    NoElements,
    #[error("diff for slice {0} failed")]
    DiffFailed(usize),
    #[error("slice size must be at least 1")]
    ZeroSliceSize,
    #[error("I/O error: {0}")]
    Io(String),
    #[error("unsupported schema_version {found}")]
    SchemaVersionMismatch { found: u64 },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Client(#[from] ClientError),
}

static CVE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^CVE-\d{4}-\d{4,}$").unwrap());

pub fn is_cve_id(id: &str) -> bool {
    CVE_RE.is_match(id)
}

/// Why a record has no patch commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnmappedReason {
    NoElements,
    NoVulnerableVersion,
    NoFixedVersion,
    EmptyRange,
    NoCandidateSlice,
    NoCandidateCommit,
    NotConfirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CveRecord {
    pub cve_id: String,
    pub tpl: String,
    pub description: String,
    pub cpes: Vec<CpeConstraint>,
    pub vulnerable_elements: VulnerableElements,
    /// Ascending.
    pub vulnerable_versions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_version: Option<String>,
    pub patch_commit: Option<String>,
    pub patch_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnmappedReason>,
    /// Vulnerable and patched code around the patch, filled in when a patch
    /// commit is mapped.
    #[serde(default, skip_serializing_if = "PatchScope::is_empty")]
    pub patch_scope: PatchScope,
}

impl CveRecord {
    pub fn affects(&self, version: &str) -> bool {
        self.vulnerable_versions.iter().any(|v| v == version)
    }
}

/// Keep the advisories that concern `tpl_name` and resolve their CPE
/// constraints against `versions` (ascending). Advisories whose CPE entries
/// cannot be parsed are kept without constraints and reported as warnings.
pub fn match_cves_to_tpl(advisories: &[Advisory], tpl_name: &str, versions: &[String]) -> (Vec<CveRecord>, Vec<VulnDbError>) {
    let needle = tpl_name.to_lowercase();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for adv in advisories {
        let mut cpes = Vec::new();
        let mut unparseable = false;
        for m in adv.cpe.iter().filter(|m| m.vulnerable) {
            match CpeConstraint::from_match(m) {
                Some(c) => cpes.push(c),
                None => unparseable = true,
            }
        }
        let relevant: Vec<CpeConstraint> = cpes.into_iter().filter(|c| c.product.contains(&needle)).collect();
        if relevant.is_empty() && !adv.description.to_lowercase().contains(&needle) {
            continue;
        }
        if unparseable {
            log::warn!("{}: unparseable CPE entry ignored", adv.id);
            warnings.push(VulnDbError::UnparseableCpe(adv.id.clone()));
        }
        let mut vulnerable: BTreeSet<&String> = BTreeSet::new();
        for c in &relevant {
            vulnerable.extend(c.resolve(versions));
        }
        let vulnerable_versions = versions.iter().filter(|v| vulnerable.contains(v)).cloned().collect();
        records.push(CveRecord {
            cve_id: adv.id.clone(),
            tpl: tpl_name.to_string(),
            description: adv.description.clone(),
            cpes: relevant,
            vulnerable_elements: VulnerableElements::default(),
            vulnerable_versions,
            fixed_version: adv.fixed_version.clone(),
            patch_commit: None,
            patch_url: None,
            reason: None,
            patch_scope: PatchScope::default(),
        });
    }
    (records, warnings)
}

/// Extract vulnerable elements; the rule oracle answers when `oracle` fails.
pub fn parse_vulnerable_elements(description: &str, oracle: &dyn DescriptionOracle) -> VulnerableElements {
    match oracle.extract(description) {
        Ok(el) => el,
        Err(e) => {
            log::warn!("description oracle unavailable ({e}); using rules");
            crate::clients::RuleOracle.extract(description).unwrap_or_default()
        }
    }
}
