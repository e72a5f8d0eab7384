//! Third-party library fingerprint database: library selection, per-version
//! function fingerprints with birth times, redundancy elimination and the
//! on-disk component segment.

mod build;
mod eliminate;
mod segment;
mod select;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::FuzzyDigest;

pub use build::{build_segment, build_version_records, VersionBuild};
pub use eliminate::{eliminate_redundancy, eliminate_with_stats, EliminationStats};
pub use segment::{load, load_str, persist, to_jsonl, SCHEMA_VERSION};
pub use select::{select_tpls, RepoMetadata};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComponentDbError {
    #[error("repository unavailable: {0}")]
    RepoUnavailable(String),
    #[error("cannot check out tag `{0}`")]
    TagCheckoutFailed(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersionMismatch { found: u64 },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// One library function: digest plus the time it first appeared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionFingerprint {
    #[serde(rename = "digest")]
    pub h: FuzzyDigest,
    pub birth: DateTime<Utc>,
    pub origin_tpl: String,
    pub origin_path: String,
}

impl FunctionFingerprint {
    /// Survivor order within a group of equal digests.
    pub(crate) fn precedence_key(&self) -> (DateTime<Utc>, &str, &str) {
        (self.birth, &self.origin_tpl, &self.origin_path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TplVersionRecord {
    pub tpl_name: String,
    pub version_tag: String,
    pub publish_time: DateTime<Utc>,
    pub fc: Vec<FunctionFingerprint>,
}

/// Fingerprints of every selected library, grouped per version, plus the
/// digest index of elimination survivors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentSegment {
    pub tpls: BTreeMap<String, Vec<TplVersionRecord>>,
    pub hash_index: BTreeMap<String, FunctionFingerprint>,
}

impl ComponentSegment {
    pub fn from_records(records: impl IntoIterator<Item = TplVersionRecord>) -> Self {
        let mut seg = ComponentSegment::default();
        for r in records {
            seg.tpls.entry(r.tpl_name.clone()).or_default().push(r);
        }
        for versions in seg.tpls.values_mut() {
            versions.sort_by(|a, b| {
                a.publish_time
                    .cmp(&b.publish_time)
                    .then_with(|| crate::version::compare_versions(&a.version_tag, &b.version_tag))
            });
        }
        seg.rebuild_index();
        seg
    }

    /// Recompute `hash_index` as the earliest fingerprint of every digest.
    pub fn rebuild_index(&mut self) {
        let mut index: BTreeMap<String, FunctionFingerprint> = BTreeMap::new();
        for fp in self.fingerprints() {
            match index.get(fp.h.hex()) {
                Some(best) if best.precedence_key() <= fp.precedence_key() => {}
                _ => {
                    index.insert(fp.h.hex().to_string(), fp.clone());
                }
            }
        }
        self.hash_index = index;
    }

    pub fn fingerprints(&self) -> impl Iterator<Item = &FunctionFingerprint> {
        self.records().flat_map(|r| r.fc.iter())
    }

    pub fn records(&self) -> impl Iterator<Item = &TplVersionRecord> {
        self.tpls.values().flatten()
    }

    pub fn version_count(&self) -> usize {
        self.tpls.values().map(Vec::len).sum()
    }

    pub fn fingerprint_count(&self) -> usize {
        self.records().map(|r| r.fc.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tpls.is_empty()
    }
}
