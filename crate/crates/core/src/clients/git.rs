//! Read-only access to a git history: tags, commit ranges, diffs and file
//! contents. Two backends share one contract: a JSON manifest describing a
//! synthetic linear history, and the `git` executable.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::ClientError;
use crate::code_model::{extract_snippets, is_source_path, SnippetKind};
use crate::diff::render_unified;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TagInfo {
    pub name: String,
    pub commit: String,
    pub time: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommitMeta {
    pub hash: String,
    pub time: DateTime<Utc>,
    pub message: String,
}

/// Contract every repository backend satisfies.
///
/// Revisions are commit hashes or tag names. Timestamps are commit times at
/// one-second resolution.
pub trait GitRepoHandle: Send + Sync {
    /// Tags ordered by commit time, then name.
    fn list_tags(&self) -> Result<Vec<TagInfo>, ClientError>;

    /// Commits with `after < time <= until`, oldest first.
    fn commits_between(&self, after: DateTime<Utc>, until: DateTime<Utc>) -> Result<Vec<CommitMeta>, ClientError>;

    /// Unified diff from `a` to `b`; empty when the trees are identical.
    fn diff(&self, a: &str, b: &str) -> Result<String, ClientError>;

    /// Unified diff a commit introduces relative to its first parent.
    fn diff_of(&self, commit: &str) -> Result<String, ClientError>;

    /// File contents at `rev`, or `None` if the path does not exist there.
    fn file_at(&self, rev: &str, path: &str) -> Result<Option<String>, ClientError>;

    /// Every file path present at `rev`, sorted.
    fn files_at(&self, rev: &str) -> Result<Vec<String>, ClientError>;

    /// First parent of `commit`, `None` for a root commit.
    fn parent(&self, commit: &str) -> Result<Option<String>, ClientError>;

    /// Commits that changed `path`, oldest first.
    fn path_history(&self, path: &str) -> Result<Vec<CommitMeta>, ClientError>;

    /// Time of the earliest commit after which `path` defines `symbol` as a
    /// function or global declaration.
    fn first_touch(&self, path: &str, symbol: &str) -> Result<Option<DateTime<Utc>>, ClientError> {
        for commit in self.path_history(path)? {
            if let Some(text) = self.file_at(&commit.hash, path)? {
                if defines(&text, path, symbol) {
                    return Ok(Some(commit.time));
                }
            }
        }
        Ok(None)
    }
}

fn defines(text: &str, path: &str, symbol: &str) -> bool {
    extract_snippets(text, path)
        .snippets
        .iter()
        .any(|s| s.name == symbol && matches!(s.kind, SnippetKind::Function | SnippetKind::GlobalDecl))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepoMode {
    Subprocess,
    Fixture,
}

/// Open a repository. In fixture mode `location` is a manifest JSON file.
pub fn open_repo(location: &Path, mode: RepoMode) -> Result<Box<dyn GitRepoHandle>, ClientError> {
    match mode {
        RepoMode::Fixture => Ok(Box::new(FixtureRepo::load(location)?)),
        RepoMode::Subprocess => Ok(Box::new(SubprocessRepo::open(location)?)),
    }
}

// ---------------------------------------------------------------------------
// Fixture manifests

/// One commit of a synthetic history. `files` maps a path to its new
/// contents, or to `null` for a deletion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCommit {
    pub hash: String,
    pub time: DateTime<Utc>,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub files: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestTag {
    pub name: String,
    pub commit: String,
}

/// A linear history, oldest commit first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoManifest {
    #[serde(default)]
    pub name: String,
    pub commits: Vec<ManifestCommit>,
    #[serde(default)]
    pub tags: Vec<ManifestTag>,
}

/// In-memory repository built from a [`RepoManifest`].
#[derive(Debug)]
pub struct FixtureRepo {
    manifest: RepoManifest,
    index: HashMap<String, usize>,
    tags: HashMap<String, usize>,
    // Snapshot after each commit, built lazily.
    snapshots: Mutex<HashMap<usize, std::sync::Arc<BTreeMap<String, String>>>>,
}

impl FixtureRepo {
    pub fn load(path: &Path) -> Result<Self, ClientError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClientError::RepoUnavailable(format!("{}: {e}", path.display())))?;
        let manifest: RepoManifest = serde_json::from_str(&text)
            .map_err(|e| ClientError::BadManifest(format!("{}: {e}", path.display())))?;
        Self::new(manifest)
    }

    pub fn new(manifest: RepoManifest) -> Result<Self, ClientError> {
        let mut index = HashMap::new();
        for (i, c) in manifest.commits.iter().enumerate() {
            if index.insert(c.hash.clone(), i).is_some() {
                return Err(ClientError::BadManifest(format!("duplicate commit {}", c.hash)));
            }
            if i > 0 && manifest.commits[i - 1].time >= c.time {
                return Err(ClientError::BadManifest(format!("commit {} is not newer than its parent", c.hash)));
            }
        }
        let mut tags = HashMap::new();
        for t in &manifest.tags {
            let i = *index
                .get(&t.commit)
                .ok_or_else(|| ClientError::BadManifest(format!("tag {} points at unknown commit", t.name)))?;
            tags.insert(t.name.clone(), i);
        }
        Ok(Self { manifest, index, tags, snapshots: Mutex::new(HashMap::new()) })
    }

    pub fn manifest(&self) -> &RepoManifest {
        &self.manifest
    }

    fn resolve(&self, rev: &str) -> Result<usize, ClientError> {
        if let Some(&i) = self.index.get(rev) {
            return Ok(i);
        }
        if let Some(&i) = self.tags.get(rev) {
            return Ok(i);
        }
        // Unambiguous abbreviated hash.
        let mut hits = self.manifest.commits.iter().enumerate().filter(|(_, c)| rev.len() >= 4 && c.hash.starts_with(rev));
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            _ => Err(ClientError::UnknownRevision(rev.to_string())),
        }
    }

    fn snapshot(&self, at: usize) -> std::sync::Arc<BTreeMap<String, String>> {
        let mut cache = self.snapshots.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = cache.get(&at) {
            return s.clone();
        }
        // Start from the nearest cached ancestor.
        let (mut i, mut files) = match (0..at).rev().find_map(|j| cache.get(&j).map(|s| (j + 1, (**s).clone()))) {
            Some(found) => found,
            None => (0, BTreeMap::new()),
        };
        while i <= at {
            for (path, content) in &self.manifest.commits[i].files {
                match content {
                    Some(text) => {
                        files.insert(path.clone(), text.clone());
                    }
                    None => {
                        files.remove(path);
                    }
                }
            }
            i += 1;
        }
        let snap = std::sync::Arc::new(files);
        cache.insert(at, snap.clone());
        snap
    }

    fn meta(&self, i: usize) -> CommitMeta {
        let c = &self.manifest.commits[i];
        CommitMeta { hash: c.hash.clone(), time: c.time, message: c.message.trim_end().to_string() }
    }

    fn diff_snapshots(old: Option<&BTreeMap<String, String>>, new: &BTreeMap<String, String>) -> String {
        let empty = BTreeMap::new();
        let old = old.unwrap_or(&empty);
        let mut paths: Vec<&String> = old.keys().chain(new.keys()).collect();
        paths.sort();
        paths.dedup();
        paths
            .into_iter()
            .map(|p| render_unified(p, old.get(p).map(String::as_str), new.get(p).map(String::as_str)))
            .collect()
    }
}

impl GitRepoHandle for FixtureRepo {
    fn list_tags(&self) -> Result<Vec<TagInfo>, ClientError> {
        let mut tags: Vec<TagInfo> = self
            .manifest
            .tags
            .iter()
            .map(|t| TagInfo { name: t.name.clone(), commit: t.commit.clone(), time: self.manifest.commits[self.tags[&t.name]].time })
            .collect();
        tags.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.name.cmp(&b.name)));
        Ok(tags)
    }

    fn commits_between(&self, after: DateTime<Utc>, until: DateTime<Utc>) -> Result<Vec<CommitMeta>, ClientError> {
        Ok((0..self.manifest.commits.len())
            .filter(|&i| {
                let t = self.manifest.commits[i].time;
                t > after && t <= until
            })
            .map(|i| self.meta(i))
            .collect())
    }

    fn diff(&self, a: &str, b: &str) -> Result<String, ClientError> {
        let (a, b) = (self.resolve(a)?, self.resolve(b)?);
        if a == b {
            return Ok(String::new());
        }
        Ok(Self::diff_snapshots(Some(&self.snapshot(a)), &self.snapshot(b)))
    }

    fn diff_of(&self, commit: &str) -> Result<String, ClientError> {
        let i = self.resolve(commit)?;
        let parent = if i == 0 { None } else { Some(self.snapshot(i - 1)) };
        Ok(Self::diff_snapshots(parent.as_deref(), &self.snapshot(i)))
    }

    fn file_at(&self, rev: &str, path: &str) -> Result<Option<String>, ClientError> {
        let i = self.resolve(rev)?;
        Ok(self.snapshot(i).get(path).cloned())
    }

    fn files_at(&self, rev: &str) -> Result<Vec<String>, ClientError> {
        let i = self.resolve(rev)?;
        Ok(self.snapshot(i).keys().cloned().collect())
    }

    fn parent(&self, commit: &str) -> Result<Option<String>, ClientError> {
        let i = self.resolve(commit)?;
        Ok(i.checked_sub(1).map(|p| self.manifest.commits[p].hash.clone()))
    }

    fn path_history(&self, path: &str) -> Result<Vec<CommitMeta>, ClientError> {
        let mut out = Vec::new();
        let mut previous: Option<&str> = None;
        for (i, c) in self.manifest.commits.iter().enumerate() {
            if let Some(content) = c.files.get(path) {
                let content = content.as_deref();
                if content != previous {
                    out.push(self.meta(i));
                }
                previous = content;
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// git subprocess

/// Repository accessed through the `git` executable.
#[derive(Debug, Clone)]
pub struct SubprocessRepo {
    root: PathBuf,
}

const FIELD: char = '\u{1f}';
const RECORD: char = '\u{1e}';

impl SubprocessRepo {
    pub fn open(location: &Path) -> Result<Self, ClientError> {
        let repo = Self { root: location.to_path_buf() };
        let top = repo
            .git(&["rev-parse", "--git-dir"])
            .map_err(|e| ClientError::RepoUnavailable(format!("{}: {e}", location.display())))?;
        if top.trim().is_empty() {
            return Err(ClientError::RepoUnavailable(location.display().to_string()));
        }
        Ok(repo)
    }

    fn git(&self, args: &[&str]) -> Result<String, ClientError> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(["-c", "core.quotepath=off", "-c", "diff.noprefix=false"])
            .args(args)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("LC_ALL", "C")
            .output()
            .map_err(|e| ClientError::Git(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Err(ClientError::Git(String::from_utf8_lossy(&out.stderr).trim().to_string()));
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }

    fn commit_of(&self, rev: &str) -> Result<String, ClientError> {
        self.git(&["rev-parse", "--verify", "--quiet", &format!("{rev}^{{commit}}")])
            .map(|s| s.trim().to_string())
            .map_err(|_| ClientError::UnknownRevision(rev.to_string()))
    }

    fn log(&self, extra: &[&str]) -> Result<Vec<CommitMeta>, ClientError> {
        let format = format!("--format=%H{FIELD}%ct{FIELD}%B{RECORD}");
        let mut args = vec!["log", "--reverse", "--date-order", "--no-color", format.as_str()];
        args.extend_from_slice(extra);
        let text = match self.git(&args) {
            Ok(t) => t,
            // A repository without commits has no log.
            Err(_) if self.git(&["rev-parse", "--verify", "--quiet", "HEAD"]).is_err() => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut commits = Vec::new();
        for record in text.split(RECORD) {
            let record = record.trim_start_matches('\n');
            if record.is_empty() {
                continue;
            }
            let mut fields = record.splitn(3, FIELD);
            let (Some(hash), Some(secs), Some(message)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(ClientError::Git(format!("unexpected log record `{record}`")));
            };
            commits.push(CommitMeta {
                hash: hash.to_string(),
                time: epoch(secs)?,
                message: message.trim_end().to_string(),
            });
        }
        commits.sort_by(|a, b| a.time.cmp(&b.time));
        Ok(commits)
    }

    /// Export the first-parent history as a fixture manifest.
    pub fn export_manifest(&self) -> Result<RepoManifest, ClientError> {
        let mut manifest = RepoManifest {
            name: self.root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            ..Default::default()
        };
        for meta in self.log(&["--first-parent"])? {
            let names = self.git(&["diff-tree", "--root", "--no-commit-id", "--no-renames", "-r", "--name-status", "-z", &meta.hash])?;
            let mut files = BTreeMap::new();
            let mut fields = names.split('\0').filter(|s| !s.is_empty());
            while let (Some(status), Some(path)) = (fields.next(), fields.next()) {
                let content = if status.starts_with('D') { None } else { self.file_at(&meta.hash, path)? };
                files.insert(path.to_string(), content);
            }
            manifest.commits.push(ManifestCommit { hash: meta.hash, time: meta.time, message: meta.message, files });
        }
        for tag in self.list_tags()? {
            manifest.tags.push(ManifestTag { name: tag.name, commit: tag.commit });
        }
        Ok(manifest)
    }
}

fn epoch(secs: &str) -> Result<DateTime<Utc>, ClientError> {
    secs.trim()
        .parse::<i64>()
        .ok()
        .and_then(|s| Utc.timestamp_opt(s, 0).single())
        .ok_or_else(|| ClientError::Git(format!("bad timestamp `{secs}`")))
}

impl GitRepoHandle for SubprocessRepo {
    fn list_tags(&self) -> Result<Vec<TagInfo>, ClientError> {
        let text = self.git(&["tag", "--list"])?;
        let mut tags = Vec::new();
        for name in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let commit = self.commit_of(name)?;
            let secs = self.git(&["show", "-s", "--format=%ct", &commit])?;
            tags.push(TagInfo { name: name.to_string(), commit, time: epoch(&secs)? });
        }
        tags.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.name.cmp(&b.name)));
        Ok(tags)
    }

    fn commits_between(&self, after: DateTime<Utc>, until: DateTime<Utc>) -> Result<Vec<CommitMeta>, ClientError> {
        Ok(self.log(&[])?.into_iter().filter(|c| c.time > after && c.time <= until).collect())
    }

    fn diff(&self, a: &str, b: &str) -> Result<String, ClientError> {
        let (a, b) = (self.commit_of(a)?, self.commit_of(b)?);
        if a == b {
            return Ok(String::new());
        }
        self.git(&["diff", "--no-color", "--no-ext-diff", "--no-renames", "-U3", &a, &b])
    }

    fn diff_of(&self, commit: &str) -> Result<String, ClientError> {
        let c = self.commit_of(commit)?;
        match self.parent(&c)? {
            Some(p) => self.diff(&p, &c),
            None => {
                let empty_tree = self.git(&["hash-object", "-t", "tree", "/dev/null"])?;
                self.git(&["diff", "--no-color", "--no-ext-diff", "--no-renames", "-U3", empty_tree.trim(), &c])
            }
        }
    }

    fn file_at(&self, rev: &str, path: &str) -> Result<Option<String>, ClientError> {
        let c = self.commit_of(rev)?;
        let listed = self.git(&["ls-tree", "--name-only", &c, "--", path])?;
        if listed.trim().is_empty() {
            return Ok(None);
        }
        self.git(&["show", &format!("{c}:{path}")]).map(Some)
    }

    fn files_at(&self, rev: &str) -> Result<Vec<String>, ClientError> {
        let c = self.commit_of(rev)?;
        let text = self.git(&["ls-tree", "-r", "--name-only", "-z", &c])?;
        let mut files: Vec<String> = text.split('\0').filter(|s| !s.is_empty()).map(String::from).collect();
        files.sort();
        Ok(files)
    }

    fn parent(&self, commit: &str) -> Result<Option<String>, ClientError> {
        let c = self.commit_of(commit)?;
        let line = self.git(&["rev-list", "--parents", "-n", "1", &c])?;
        Ok(line.split_whitespace().nth(1).map(String::from))
    }

    fn path_history(&self, path: &str) -> Result<Vec<CommitMeta>, ClientError> {
        self.log(&["--first-parent", "--", path])
    }
}

/// Source files (by extension) present at `rev`.
pub fn source_files_at(repo: &dyn GitRepoHandle, rev: &str) -> Result<Vec<String>, ClientError> {
    Ok(repo.files_at(rev)?.into_iter().filter(|p| is_source_path(Path::new(p))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_600_000_000 + secs, 0).unwrap()
    }

    fn manifest() -> RepoManifest {
        let commit = |hash: &str, secs, files: &[(&str, Option<&str>)]| ManifestCommit {
            hash: hash.into(),
            time: t(secs),
            message: format!("commit {hash}"),
            files: files.iter().map(|(p, c)| (p.to_string(), c.map(String::from))).collect(),
        };
        RepoManifest {
            name: "demo".into(),
            commits: vec![
                commit("aaaa1", 0, &[("src/a.c", Some("int f(void)\n{\nreturn 0;\n}\n"))]),
                commit("bbbb2", 10, &[("src/b.c", Some("int g;\n"))]),
                commit("cccc3", 20, &[("src/a.c", Some("int f(void)\n{\nreturn 1;\n}\n")), ("src/b.c", None)]),
            ],
            tags: vec![ManifestTag { name: "v1".into(), commit: "aaaa1".into() }, ManifestTag { name: "v2".into(), commit: "cccc3".into() }],
        }
    }

    #[test]
    fn commits_between_is_half_open_and_ordered() {
        let repo = FixtureRepo::new(manifest()).unwrap();
        let all: Vec<String> = repo.commits_between(t(-1), t(20)).unwrap().into_iter().map(|c| c.hash).collect();
        assert_eq!(all, ["aaaa1", "bbbb2", "cccc3"]);
        let tail: Vec<String> = repo.commits_between(t(0), t(20)).unwrap().into_iter().map(|c| c.hash).collect();
        assert_eq!(tail, ["bbbb2", "cccc3"]);
    }

    #[test]
    fn diff_of_same_revision_is_empty() {
        let repo = FixtureRepo::new(manifest()).unwrap();
        assert_eq!(repo.diff("cccc3", "v2").unwrap(), "");
        let d = repo.diff("v1", "v2").unwrap();
        assert!(d.contains("-return 0;\n+return 1;"));
        assert!(!d.contains("src/b.c"));
    }

    #[test]
    fn snapshots_follow_deletions() {
        let repo = FixtureRepo::new(manifest()).unwrap();
        assert_eq!(repo.files_at("bbbb2").unwrap(), ["src/a.c", "src/b.c"]);
        assert_eq!(repo.files_at("v2").unwrap(), ["src/a.c"]);
        assert_eq!(repo.file_at("v2", "src/b.c").unwrap(), None);
        assert_eq!(repo.parent("aaaa1").unwrap(), None);
        assert_eq!(repo.parent("cccc").unwrap().as_deref(), Some("bbbb2"));
    }

    #[test]
    fn first_touch_finds_the_defining_commit() {
        let repo = FixtureRepo::new(manifest()).unwrap();
        assert_eq!(repo.first_touch("src/a.c", "f").unwrap(), Some(t(0)));
        assert_eq!(repo.first_touch("src/b.c", "g").unwrap(), Some(t(10)));
        assert_eq!(repo.first_touch("src/a.c", "nope").unwrap(), None);
    }

    #[test]
    fn rejects_unordered_history() {
        let mut m = manifest();
        m.commits[2].time = t(5);
        assert!(matches!(FixtureRepo::new(m), Err(ClientError::BadManifest(_))));
    }
}
