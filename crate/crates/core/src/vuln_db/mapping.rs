//! CVE-to-patch-commit mapping: date-window slicing, slice and commit
//! filtering by vulnerable elements, and relevance confirmation.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::cpe::{sort_tags, version_core};
use super::{CveRecord, UnmappedReason, VulnDbError};
use crate::clients::{CommitMeta, DescriptionOracle, GitRepoHandle, OracleRequest, RelevanceOracle, TagInfo, VulnerableElements};
use crate::code_model::is_source_path;
use crate::diff::{parse_unified, DiffParseError};
use crate::flaw_detect::{version_diff_files, PatchScope};
use crate::version::compare_segments;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitSlice {
    /// 1-based position in time order.
    pub index: usize,
    pub commits: Vec<CommitMeta>,
}

/// Cut time-ordered commits into consecutive slices of `k`; only the last
/// slice may be shorter.
pub fn slice_commits(commits: &[CommitMeta], k: usize) -> Result<Vec<CommitSlice>, VulnDbError> {
    if k == 0 {
        return Err(VulnDbError::ZeroSliceSize);
    }
    if commits.is_empty() {
        return Err(VulnDbError::EmptyRange);
    }
    Ok(commits
        .chunks(k)
        .enumerate()
        .map(|(i, c)| CommitSlice { index: i + 1, commits: c.to_vec() })
        .collect())
}

static IDENT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").unwrap());

fn file_matches(path: &str, file: &str) -> bool {
    path == file || path.ends_with(&format!("/{file}")) || Path::new(path).file_name().is_some_and(|n| n == file)
}

/// Whether a unified diff touches a vulnerable file, or any of its hunk
/// lines (context included) mentions a vulnerable function or variable as
/// an identifier.
pub fn diff_touches(diff_text: &str, elements: &VulnerableElements) -> Result<bool, DiffParseError> {
    let names: BTreeSet<&str> = elements.functions.iter().chain(&elements.variables).map(String::as_str).collect();
    for file in parse_unified(diff_text)? {
        let paths = [file.old_path.as_deref(), file.new_path.as_deref()];
        if elements.files.iter().any(|f| paths.iter().flatten().any(|p| file_matches(p, f))) {
            return Ok(true);
        }
        for hunk in &file.hunks {
            for (_, line) in &hunk.lines {
                if IDENT_RE.find_iter(line).any(|m| names.contains(m.as_str())) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Keep slices whose cumulative change touches the elements. The change of
/// a slice runs from the parent of its first commit to its last commit, so
/// every commit of the slice contributes. Slices whose diff cannot be
/// computed are kept.
pub fn filter_candidate_slices(
    slices: &[CommitSlice],
    elements: &VulnerableElements,
    repo: &dyn GitRepoHandle,
) -> Vec<CommitSlice> {
    slices
        .iter()
        .filter(|slice| {
            let (Some(first), Some(last)) = (slice.commits.first(), slice.commits.last()) else {
                return false;
            };
            let diff = match repo.parent(&first.hash) {
                Ok(Some(base)) => repo.diff(&base, &last.hash),
                Ok(None) => repo.diff_of(&first.hash).and_then(|d| {
                    if first.hash == last.hash {
                        Ok(d)
                    } else {
                        repo.diff(&first.hash, &last.hash).map(|rest| d + &rest)
                    }
                }),
                Err(e) => Err(e),
            };
            match diff.map_err(|e| e.to_string()).and_then(|d| diff_touches(&d, elements).map_err(|e| e.to_string())) {
                Ok(hit) => hit,
                Err(e) => {
                    log::warn!("{}: {e}; keeping slice", VulnDbError::DiffFailed(slice.index));
                    true
                }
            }
        })
        .cloned()
        .collect()
}

/// A commit whose own diff touches the vulnerable elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub commit: CommitMeta,
    #[serde(skip)]
    pub diff: String,
}

pub fn select_candidate_commits(slice: &CommitSlice, elements: &VulnerableElements, repo: &dyn GitRepoHandle) -> Vec<Candidate> {
    let mut out = Vec::new();
    for commit in &slice.commits {
        match repo.diff_of(&commit.hash) {
            Ok(diff) => match diff_touches(&diff, elements) {
                Ok(true) => out.push(Candidate { commit: commit.clone(), diff }),
                Ok(false) => {}
                Err(e) => {
                    log::warn!("{}: unparseable diff ({e}); keeping as candidate", commit.hash);
                    out.push(Candidate { commit: commit.clone(), diff });
                }
            },
            Err(e) => {
                log::warn!("{}: diff failed ({e}); keeping as candidate", commit.hash);
                out.push(Candidate { commit: commit.clone(), diff: String::new() });
            }
        }
    }
    out
}

const MAX_CODE_CHARS: usize = 16_000;

/// Ask the oracle about each candidate; the earliest confirmed one wins.
pub fn confirm_patch_commit(cve: &CveRecord, candidates: &[Candidate], oracle: &dyn RelevanceOracle) -> Option<String> {
    let mut confirmed: Vec<&Candidate> = Vec::new();
    for c in candidates {
        let mut code = c.diff.clone();
        if code.len() > MAX_CODE_CHARS {
            let mut cut = MAX_CODE_CHARS;
            while !code.is_char_boundary(cut) {
                cut -= 1;
            }
            code.truncate(cut);
        }
        let request = OracleRequest {
            cve_id: cve.cve_id.clone(),
            cve_description: cve.description.clone(),
            commit_message: c.commit.message.clone(),
            modified_code: code,
            vulnerable_functions: cve.vulnerable_elements.functions.iter().cloned().collect(),
        };
        let verdict = oracle.judge(&request).or_else(|e| {
            log::warn!("relevance oracle unavailable ({e}); using rules");
            crate::clients::RuleOracle.judge(&request)
        });
        if verdict.is_ok_and(|r| r.relevant) {
            confirmed.push(c);
        }
    }
    confirmed.sort_by_key(|c| c.commit.time);
    if confirmed.len() > 1 {
        log::info!("{}: {} commits confirmed; taking the earliest", cve.cve_id, confirmed.len());
    }
    confirmed.first().map(|c| c.commit.hash.clone())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MapOptions {
    pub k: usize,
    /// Web URL of the repository; patch URLs become `<url>/commit/<hash>`.
    pub repo_url: Option<String>,
}

/// Record of every step, printed by `--trace`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingTrace {
    pub cve_id: String,
    pub elements: VulnerableElements,
    pub last_vulnerable: Option<String>,
    pub first_patched: Option<String>,
    pub window: Option<(DateTime<Utc>, DateTime<Utc>)>,
    pub commits_in_window: usize,
    pub slice_sizes: Vec<usize>,
    pub candidate_slices: Vec<usize>,
    pub candidate_commits: Vec<String>,
    pub confirmed: Option<String>,
    pub reason: Option<UnmappedReason>,
    pub per_commit_diffs: usize,
}

impl MappingTrace {
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("{}: elements files={:?} functions={:?} variables={:?}", self.cve_id, self.elements.files, self.elements.functions, self.elements.variables)];
        if let (Some(lv), Some(fp)) = (&self.last_vulnerable, &self.first_patched) {
            out.push(format!("{}: last vulnerable {lv}, first patched {fp}", self.cve_id));
        }
        if let Some((a, b)) = &self.window {
            out.push(format!(
                "{}: window ({}, {}] holds {} commits",
                self.cve_id,
                a.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                b.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                self.commits_in_window
            ));
        }
        if !self.slice_sizes.is_empty() {
            out.push(format!(
                "{}: {} slices, last slice has {} commits",
                self.cve_id,
                self.slice_sizes.len(),
                self.slice_sizes.last().copied().unwrap_or(0)
            ));
            out.push(format!("{}: {} candidate slice(s) {:?}", self.cve_id, self.candidate_slices.len(), self.candidate_slices));
            out.push(format!("{}: {} candidate commit(s) {:?}", self.cve_id, self.candidate_commits.len(), self.candidate_commits));
        }
        match (&self.confirmed, self.reason) {
            (Some(c), _) => out.push(format!("{}: patch commit {c}", self.cve_id)),
            (None, Some(r)) => out.push(format!("{}: unmapped ({})", self.cve_id, serde_json::to_value(r).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())),
            (None, None) => {}
        }
        out
    }
}

fn find_tag<'a>(tags: &'a [TagInfo], version: &str) -> Option<&'a TagInfo> {
    tags.iter()
        .find(|t| t.name == version)
        .or_else(|| tags.iter().find(|t| compare_segments(version_core(&t.name), version_core(version)).is_eq()))
}

/// Run the whole mapping for one record, filling `patch_commit`,
/// `patch_url`, `reason` and `patch_scope`.
pub fn map_patch_commit(
    record: &mut CveRecord,
    repo: &dyn GitRepoHandle,
    tags: &[TagInfo],
    references: &[String],
    description_oracle: &dyn DescriptionOracle,
    relevance_oracle: &dyn RelevanceOracle,
    options: &MapOptions,
) -> Result<MappingTrace, VulnDbError> {
    let mut trace = MappingTrace { cve_id: record.cve_id.clone(), ..Default::default() };
    let finish = |record: &mut CveRecord, trace: &mut MappingTrace, reason: UnmappedReason| {
        record.patch_commit = None;
        record.patch_url = None;
        record.reason = Some(reason);
        trace.reason = Some(reason);
    };

    record.vulnerable_elements = super::parse_vulnerable_elements(&record.description, description_oracle);
    trace.elements = record.vulnerable_elements.clone();
    if record.vulnerable_elements.is_empty() {
        finish(record, &mut trace, UnmappedReason::NoElements);
        return Ok(trace);
    }

    let mut names: Vec<String> = tags.iter().map(|t| t.name.clone()).collect();
    sort_tags(&mut names);
    let Some(last_vulnerable) = record.vulnerable_versions.iter().filter_map(|v| names.iter().position(|n| n == v)).max() else {
        finish(record, &mut trace, UnmappedReason::NoVulnerableVersion);
        return Ok(trace);
    };
    let first_patched = match record.fixed_version.as_deref().and_then(|v| find_tag(tags, v)) {
        Some(t) => Some(t.name.clone()),
        None => names.get(last_vulnerable + 1).cloned(),
    };
    let Some(first_patched) = first_patched else {
        finish(record, &mut trace, UnmappedReason::NoFixedVersion);
        return Ok(trace);
    };
    let t0 = find_tag(tags, &names[last_vulnerable]).map(|t| t.time);
    let t1 = find_tag(tags, &first_patched).map(|t| t.time);
    trace.last_vulnerable = Some(names[last_vulnerable].clone());
    trace.first_patched = Some(first_patched.clone());
    let (Some(t0), Some(t1)) = (t0, t1) else {
        finish(record, &mut trace, UnmappedReason::NoFixedVersion);
        return Ok(trace);
    };
    trace.window = Some((t0, t1));

    let commits = if t1 > t0 { repo.commits_between(t0, t1)? } else { Vec::new() };
    trace.commits_in_window = commits.len();
    let slices = match slice_commits(&commits, options.k) {
        Ok(s) => s,
        Err(VulnDbError::EmptyRange) => {
            finish(record, &mut trace, UnmappedReason::EmptyRange);
            return Ok(trace);
        }
        Err(e) => return Err(e),
    };
    trace.slice_sizes = slices.iter().map(|s| s.commits.len()).collect();

    let kept = filter_candidate_slices(&slices, &record.vulnerable_elements, repo);
    trace.candidate_slices = kept.iter().map(|s| s.index).collect();
    if kept.is_empty() {
        finish(record, &mut trace, UnmappedReason::NoCandidateSlice);
        return Ok(trace);
    }

    let mut candidates = Vec::new();
    for slice in &kept {
        trace.per_commit_diffs += slice.commits.len();
        candidates.extend(select_candidate_commits(slice, &record.vulnerable_elements, repo));
    }
    trace.candidate_commits = candidates.iter().map(|c| c.commit.hash.clone()).collect();
    if candidates.is_empty() {
        finish(record, &mut trace, UnmappedReason::NoCandidateCommit);
        return Ok(trace);
    }

    let Some(hash) = confirm_patch_commit(record, &candidates, relevance_oracle) else {
        finish(record, &mut trace, UnmappedReason::NotConfirmed);
        return Ok(trace);
    };
    trace.confirmed = Some(hash.clone());
    record.reason = None;
    record.patch_url = references
        .iter()
        .find(|r| r.contains(&hash))
        .cloned()
        .or_else(|| options.repo_url.as_ref().map(|u| format!("{}/commit/{hash}", u.trim_end_matches('/'))));
    record.patch_scope = patch_scope(repo, &hash)?;
    record.patch_commit = Some(hash);
    Ok(trace)
}

/// Vulnerable and patched snippets of every source file the commit changes.
pub fn patch_scope(repo: &dyn GitRepoHandle, commit: &str) -> Result<PatchScope, VulnDbError> {
    let parent = repo.parent(commit)?;
    let diff = repo.diff_of(commit)?;
    let files = parse_unified(&diff).map_err(|e| VulnDbError::Client(crate::clients::ClientError::Git(e.to_string())))?;
    let mut scope = PatchScope::default();
    for f in files {
        let path = f.path().to_string();
        if !is_source_path(Path::new(&path)) {
            continue;
        }
        let old = match (&parent, &f.old_path) {
            (Some(p), Some(old_path)) => repo.file_at(p, old_path)?,
            _ => None,
        };
        let new = match &f.new_path {
            Some(new_path) => repo.file_at(commit, new_path)?,
            None => None,
        };
        scope.merge(version_diff_files(&path, old.as_deref(), new.as_deref()));
    }
    Ok(scope)
}
