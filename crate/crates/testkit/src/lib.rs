//! Synthetic repositories, targets and labelled code triples used by the
//! integration and acceptance tests.

pub mod benchmark;
pub mod cpe;
pub mod dependency;
pub mod elimination;
pub mod git_repo;
pub mod robustness;
pub mod wireshark;

use std::fs;
use std::io;
use std::path::Path;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};
use vulture::clients::{ManifestCommit, ManifestTag, RepoManifest};

/// Deterministic 40-hex commit id.
pub fn commit_hash(repo: &str, n: usize) -> String {
    let sum = Sha256::digest(format!("{repo}:{n}").as_bytes());
    sum.iter().take(20).map(|b| format!("{b:02x}")).collect()
}

pub fn ts(s: &str) -> DateTime<Utc> {
    s.parse().expect("RFC 3339 timestamp")
}

/// Accumulates a linear history.
#[derive(Debug, Clone, Default)]
pub struct HistoryBuilder {
    pub manifest: RepoManifest,
}

impl HistoryBuilder {
    pub fn new(name: &str) -> Self {
        HistoryBuilder { manifest: RepoManifest { name: name.into(), commits: vec![], tags: vec![] } }
    }

    pub fn commit(&mut self, hash: Option<&str>, time: DateTime<Utc>, message: &str, files: &[(&str, Option<&str>)]) -> String {
        let hash = hash.map(String::from).unwrap_or_else(|| commit_hash(&self.manifest.name, self.manifest.commits.len()));
        self.manifest.commits.push(ManifestCommit {
            hash: hash.clone(),
            time,
            message: message.into(),
            files: files.iter().map(|(p, c)| (p.to_string(), c.map(String::from))).collect(),
        });
        hash
    }

    pub fn tag(&mut self, name: &str, commit: &str) {
        self.manifest.tags.push(ManifestTag { name: name.into(), commit: commit.into() });
    }

    pub fn build(self) -> RepoManifest {
        self.manifest
    }
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value).map_err(io::Error::other)?)
}

/// Write `files` (relative path, contents) below `root`.
pub fn write_tree(root: &Path, files: &[(String, String)]) -> io::Result<()> {
    for (rel, text) in files {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, text)?;
    }
    Ok(())
}
