//! End-to-end stages: database build, patch mapping and target scanning.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clients::{open_repo, AdvisoryFeed, ClientError, DescriptionOracle, GitRepoHandle, RelevanceOracle, RepoMode};
use crate::component_db::{build_segment, select_tpls, ComponentSegment, EliminationStats, RepoMetadata};
use crate::flaw_detect::{classify_reuse, generate_report, Location, VulnFinding, VulnReport};
use crate::reuse_id::{detect_candidates, resolve_reuses, ReuseReport, TargetSnippet};
use crate::vuln_db::cpe::sort_tags;
use crate::vuln_db::{map_patch_commit, match_cves_to_tpl, MapOptions, MappingTrace, VulnSegment};

/// One line of a repository list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoEntry {
    pub name: String,
    /// A git checkout, or a manifest JSON file for a fixture history.
    /// Relative paths resolve against the list file.
    pub location: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RepoMode>,
    /// Web URL used to build patch links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RepoMetadata>,
}

impl RepoEntry {
    pub fn open(&self) -> Result<Box<dyn GitRepoHandle>, ClientError> {
        let mode = self.mode.unwrap_or(if self.location.is_file() { RepoMode::Fixture } else { RepoMode::Subprocess });
        open_repo(&self.location, mode)
    }
}

/// Read a JSON array of [`RepoEntry`].
pub fn load_repo_list(path: &Path) -> Result<Vec<RepoEntry>, ClientError> {
    let text = fs::read_to_string(path).map_err(|e| ClientError::Io(format!("{}: {e}", path.display())))?;
    let mut entries: Vec<RepoEntry> =
        serde_json::from_str(&text).map_err(|e| ClientError::BadManifest(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for e in &mut entries {
        if e.location.is_relative() {
            e.location = base.join(&e.location);
        }
    }
    Ok(entries)
}

/// Library selection applied before building.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub keywords: Vec<String>,
    pub exclude: Vec<String>,
    pub min_stars: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutcome {
    pub segment: ComponentSegment,
    pub stats: EliminationStats,
    pub warnings: Vec<String>,
}

impl BuildOutcome {
    pub fn summary(&self) -> String {
        format!(
            "{} tpls, {} versions, {} fingerprints, {} eliminated",
            self.segment.tpls.len(),
            self.segment.version_count(),
            self.segment.fingerprint_count(),
            self.stats.removed
        )
    }
}

/// Entries kept by `selection`. Without keywords every entry is kept;
/// with keywords, entries lacking metadata are dropped.
pub fn select_entries<'a>(entries: &'a [RepoEntry], selection: &Selection) -> Vec<&'a RepoEntry> {
    if selection.keywords.is_empty() {
        return entries.iter().collect();
    }
    let metas: Vec<RepoMetadata> = entries
        .iter()
        .filter_map(|e| e.metadata.clone().map(|m| RepoMetadata { name: e.name.clone(), ..m }))
        .collect();
    let keep: BTreeSet<String> = select_tpls(&metas, &selection.keywords, &selection.exclude, selection.min_stars).into_iter().collect();
    entries.iter().filter(|e| keep.contains(&e.name)).collect()
}

pub fn build_database(entries: &[RepoEntry], selection: &Selection) -> BuildOutcome {
    let mut warnings = Vec::new();
    let mut opened = Vec::new();
    for e in select_entries(entries, selection) {
        match e.open() {
            Ok(repo) => opened.push((e.name.clone(), repo)),
            Err(err) => warnings.push(format!("{}: {err}", e.name)),
        }
    }
    let refs: Vec<(String, &dyn GitRepoHandle)> = opened.iter().map(|(n, r)| (n.clone(), r.as_ref())).collect();
    let (segment, stats, more) = build_segment(&refs);
    warnings.extend(more);
    BuildOutcome { segment, stats, warnings }
}

#[derive(Debug, Clone, Default)]
pub struct MapOutcome {
    pub segment: VulnSegment,
    pub traces: Vec<MappingTrace>,
    pub warnings: Vec<String>,
}

/// Map every advisory concerning a library of `component` to its patch
/// commit. `advisories` is asked once per library name.
pub fn map_patches(
    component: &ComponentSegment,
    entries: &[RepoEntry],
    advisories: &dyn Fn(&str) -> Result<AdvisoryFeed, ClientError>,
    description_oracle: &dyn DescriptionOracle,
    relevance_oracle: &dyn RelevanceOracle,
    k: usize,
) -> Result<MapOutcome, ClientError> {
    let mut out = MapOutcome::default();
    for (tpl, records) in &component.tpls {
        let Some(entry) = entries.iter().find(|e| &e.name == tpl) else {
            out.warnings.push(format!("{tpl}: not in the repository list"));
            continue;
        };
        let repo = match entry.open() {
            Ok(r) => r,
            Err(e) => {
                out.warnings.push(format!("{tpl}: {e}"));
                continue;
            }
        };
        let tags = repo.list_tags()?;
        let feed = advisories(tpl)?;
        out.warnings.extend(feed.warnings);
        let mut versions: Vec<String> = records.iter().map(|r| r.version_tag.clone()).collect();
        sort_tags(&mut versions);
        let (mut cves, warnings) = match_cves_to_tpl(&feed.advisories, tpl, &versions);
        out.warnings.extend(warnings.iter().map(|w| format!("{tpl}: {w}")));
        let options = MapOptions { k, repo_url: entry.url.clone() };
        for record in &mut cves {
            let references = feed.advisories.iter().find(|a| a.id == record.cve_id).map(|a| a.references.clone()).unwrap_or_default();
            match map_patch_commit(record, repo.as_ref(), &tags, &references, description_oracle, relevance_oracle, &options) {
                Ok(trace) => out.traces.push(trace),
                Err(e) => out.warnings.push(format!("{}: {e}", record.cve_id)),
            }
        }
        out.segment.records.extend(cves);
    }
    out.segment.records.sort_by(|a, b| (&a.tpl, &a.cve_id).cmp(&(&b.tpl, &b.cve_id)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub th_hash: u32,
    pub th_sim: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReports {
    pub reuse: ReuseReport,
    pub vulnerabilities: VulnReport,
}

/// Identify reused libraries, then check every advisory affecting each
/// reused version against the target.
pub fn scan(target_id: &str, targets: &[TargetSnippet], component: &ComponentSegment, vulns: &VulnSegment, options: &ScanOptions) -> ScanReports {
    let candidates = detect_candidates(targets, component, options.th_hash, options.th_sim, options.seed);
    let reuse = resolve_reuses(target_id, &candidates);

    let mut tasks = Vec::new();
    for c in &reuse.confirmed {
        for record in vulns.affecting(&c.tpl_name, &c.version) {
            if !record.patch_scope.items.is_empty() {
                tasks.push((c, record));
            }
        }
    }
    let findings: Vec<VulnFinding> = tasks
        .par_iter()
        .flat_map_iter(|(c, record)| {
            let paths: BTreeSet<&str> = c.evidence_paths.iter().map(String::as_str).collect();
            let in_scope: Vec<usize> = (0..targets.len()).filter(|&i| paths.contains(targets[i].func_path.as_str())).collect();
            classify_reuse(targets, &in_scope, &record.patch_scope, options.th_hash)
                .into_iter()
                .map(|cl| {
                    let t = &targets[cl.snippet];
                    let (method, matched, unmatched) = match cl.outcome {
                        Some(o) => (Some(o.method), o.matched_chunks, o.unmatched_chunks),
                        None => (None, vec![], vec![]),
                    };
                    VulnFinding {
                        cve_id: record.cve_id.clone(),
                        group: cl.group,
                        verdict: cl.verdict,
                        location: Location { file: t.func_path.clone(), line_span: t.line_span },
                        name: t.name.clone(),
                        tpl: c.tpl_name.clone(),
                        version: c.version.clone(),
                        method,
                        matched_chunks: matched,
                        unmatched_chunks: unmatched,
                        patch_url: record.patch_url.clone(),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    ScanReports { reuse, vulnerabilities: generate_report(findings) }
}
