use std::collections::HashMap;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use super::{eliminate_with_stats, ComponentDbError, ComponentSegment, EliminationStats, FunctionFingerprint, TplVersionRecord};
use crate::clients::git::source_files_at;
use crate::clients::{ClientError, GitRepoHandle};
use crate::code_model::{extract_snippets, SnippetKind};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VersionBuild {
    pub records: Vec<TplVersionRecord>,
    pub warnings: Vec<String>,
}

/// First time each top-level name appears in `path`, found by replaying the
/// file's history once.
fn births_in(repo: &dyn GitRepoHandle, path: &str) -> Result<HashMap<String, DateTime<Utc>>, ClientError> {
    let mut births = HashMap::new();
    for commit in repo.path_history(path)? {
        if let Some(text) = repo.file_at(&commit.hash, path)? {
            for s in extract_snippets(&text, path).snippets {
                births.entry(s.name).or_insert(commit.time);
            }
        }
    }
    Ok(births)
}

/// Fingerprint every function of every tagged version of `repo`.
///
/// Birth is the time of the first commit in which the function's file
/// defines its name. A function whose body (by digest) already existed
/// earlier in the library, for instance under another file, inherits the
/// earlier birth. Births never exceed the publish time of the version.
pub fn build_version_records(tpl_name: &str, repo: &dyn GitRepoHandle) -> Result<VersionBuild, ComponentDbError> {
    let tags = repo.list_tags().map_err(|e| ComponentDbError::RepoUnavailable(e.to_string()))?;
    let mut out = VersionBuild::default();
    let mut births: HashMap<String, HashMap<String, DateTime<Utc>>> = HashMap::new();

    for tag in tags {
        let files = match source_files_at(repo, &tag.commit) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("{tpl_name}: skipping tag {}: {e}", tag.name);
                out.warnings.push(ComponentDbError::TagCheckoutFailed(tag.name.clone()).to_string());
                continue;
            }
        };
        let mut fc = Vec::new();
        let mut failed = false;
        for path in files {
            let text = match repo.file_at(&tag.commit, &path) {
                Ok(Some(t)) => t,
                Ok(None) => continue,
                Err(e) => {
                    log::warn!("{tpl_name}@{}: {path}: {e}", tag.name);
                    failed = true;
                    break;
                }
            };
            if !births.contains_key(&path) {
                let found = births_in(repo, &path).unwrap_or_default();
                births.insert(path.clone(), found);
            }
            let extraction = extract_snippets(&text, &path);
            for w in &extraction.warnings {
                out.warnings.push(format!("{tpl_name}@{}: {w}", tag.name));
            }
            for s in extraction.snippets.into_iter().filter(|s| s.kind == SnippetKind::Function) {
                let birth = births[&path].get(&s.name).copied().unwrap_or(tag.time).min(tag.time);
                fc.push(FunctionFingerprint { h: s.digest(), birth, origin_tpl: tpl_name.to_string(), origin_path: path.clone() });
            }
        }
        if failed {
            out.warnings.push(ComponentDbError::TagCheckoutFailed(tag.name.clone()).to_string());
            continue;
        }
        out.records.push(TplVersionRecord { tpl_name: tpl_name.to_string(), version_tag: tag.name, publish_time: tag.time, fc });
    }

    // Same body seen earlier in the library: keep the earliest birth.
    let mut earliest: HashMap<String, DateTime<Utc>> = HashMap::new();
    for fp in out.records.iter().flat_map(|r| r.fc.iter()) {
        let e = earliest.entry(fp.h.hex().to_string()).or_insert(fp.birth);
        *e = (*e).min(fp.birth);
    }
    for fp in out.records.iter_mut().flat_map(|r| r.fc.iter_mut()) {
        fp.birth = earliest[fp.h.hex()];
    }
    Ok(out)
}

/// Build the whole segment from named repositories: per-library work runs in
/// parallel, then a single merge and elimination pass.
pub fn build_segment(repos: &[(String, &dyn GitRepoHandle)]) -> (ComponentSegment, EliminationStats, Vec<String>) {
    let results: Vec<(String, Result<VersionBuild, ComponentDbError>)> = repos
        .par_iter()
        .map(|(name, repo)| (name.clone(), build_version_records(name, *repo)))
        .collect();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (name, result) in results {
        match result {
            Ok(mut b) => {
                records.append(&mut b.records);
                warnings.append(&mut b.warnings);
            }
            Err(e) => warnings.push(format!("{name}: {e}")),
        }
    }
    let (segment, stats) = eliminate_with_stats(ComponentSegment::from_records(records));
    (segment, stats, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::git::{FixtureRepo, ManifestCommit, ManifestTag, RepoManifest};
    use chrono::TimeZone;

    fn t(day: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2021, 3, day, 12, 0, 0).unwrap()
    }

    const F: &str = "int first_function(int a, int b)\n{\n    int s = a * 31 + b;\n    return s ^ (s >> 3);\n}\n";
    const G: &str = "int second_function(const char *p)\n{\n    int n = 0;\n    while (*p++) n += 7;\n    return n;\n}\n";

    fn commit(hash: &str, day: u32, files: &[(&str, Option<&str>)]) -> ManifestCommit {
        ManifestCommit {
            hash: hash.into(),
            time: t(day),
            message: hash.into(),
            files: files.iter().map(|(p, c)| (p.to_string(), c.map(String::from))).collect(),
        }
    }

    fn tag(name: &str, commit: &str) -> ManifestTag {
        ManifestTag { name: name.into(), commit: commit.into() }
    }

    #[test]
    fn new_function_in_v2_gets_its_commit_time() {
        let repo = FixtureRepo::new(RepoManifest {
            name: "lib".into(),
            commits: vec![
                commit("c1", 1, &[("a.c", Some(F))]),
                commit("c2", 2, &[("README", Some("docs"))]),
                commit("c3", 5, &[("a.c", Some(&format!("{F}{G}")))]),
                commit("c4", 6, &[("README", Some("docs 2"))]),
            ],
            tags: vec![tag("v1", "c2"), tag("v2", "c4")],
        })
        .unwrap();
        let b = build_version_records("lib", &repo).unwrap();
        assert_eq!(b.records.len(), 2);
        let (v1, v2) = (&b.records[0], &b.records[1]);
        let new: Vec<_> = v2.fc.iter().filter(|fp| !v1.fc.iter().any(|o| o.h == fp.h)).collect();
        assert_eq!(new.len(), 1);
        assert_eq!(new[0].birth, t(5));
        assert_eq!(v1.fc[0].birth, t(1));
        assert_eq!(v2.publish_time, t(6));
    }

    #[test]
    fn moved_function_keeps_original_birth() {
        let repo = FixtureRepo::new(RepoManifest {
            name: "lib".into(),
            commits: vec![
                commit("c1", 1, &[("a.c", Some(F))]),
                commit("c2", 3, &[("a.c", None), ("b.c", Some(F))]),
            ],
            tags: vec![tag("v1", "c1"), tag("v2", "c2")],
        })
        .unwrap();
        let b = build_version_records("lib", &repo).unwrap();
        assert_eq!(b.records[1].fc[0].origin_path, "b.c");
        assert_eq!(b.records[1].fc[0].h, b.records[0].fc[0].h);
        assert_eq!(b.records[1].fc[0].birth, t(1));
    }

    #[test]
    fn untagged_repo_has_no_records() {
        let repo = FixtureRepo::new(RepoManifest { name: "x".into(), commits: vec![commit("c1", 1, &[("a.c", Some(F))])], tags: vec![] }).unwrap();
        assert!(build_version_records("x", &repo).unwrap().records.is_empty());
    }
}
