//! Reuse identification: which libraries, at which version, a target tree
//! contains, with dependency-induced false positives pruned.

mod target;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code_model::distance_or_infinite;
use crate::component_db::{ComponentSegment, FunctionFingerprint};

pub use target::{collect_target, snippets_of, TargetSnippet};

pub const DEFAULT_TH_HASH: u32 = 30;
pub const DEFAULT_TH_SIM: f64 = 0.10;

/// A library version whose fingerprints the target resembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseCandidate {
    pub tpl_name: String,
    /// The prevalent version: most similar pairs.
    pub version: String,
    pub similar_pairs: usize,
    /// Pairs at distance 0.
    pub exact_pairs: usize,
    /// Fraction of the version's functions that were paired.
    pub ratio: f64,
    pub matched_paths: BTreeSet<String>,
    /// Digests of the paired target functions.
    pub evidence: BTreeSet<String>,
    /// Indices into the target snippet list.
    pub matched_snippets: BTreeSet<usize>,
    pub birth: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmedReuse {
    pub tpl_name: String,
    pub version: String,
    pub evidence_paths: Vec<String>,
    pub pair_count: usize,
    #[serde(skip)]
    pub matched_snippets: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseReport {
    pub target_id: String,
    pub confirmed: Vec<ConfirmedReuse>,
}

impl ReuseReport {
    pub fn to_table(&self) -> String {
        if self.confirmed.is_empty() {
            return format!("{}: no reused libraries\n", self.target_id);
        }
        let mut out = String::new();
        for c in &self.confirmed {
            out.push_str(&format!("{:<20} {:<12} {:>5} pairs  {}\n", c.tpl_name, c.version, c.pair_count, c.evidence_paths.join(", ")));
        }
        out
    }
}

/// Target-snippet index paired with each fingerprint digest within range.
fn similar_pairs<'s>(target: &[TargetSnippet], segment: &'s ComponentSegment, th_hash: u32) -> BTreeMap<&'s str, Vec<(usize, bool)>> {
    let digests: Vec<&FunctionFingerprint> = segment.hash_index.values().collect();
    let hits: Vec<Vec<(usize, bool, &str)>> = target
        .par_iter()
        .enumerate()
        .filter(|(_, t)| t.is_function())
        .map(|(i, t)| {
            digests
                .iter()
                .filter_map(|fp| {
                    let d = distance_or_infinite(&t.hash, &fp.h);
                    (d < th_hash).then(|| (i, d == 0, fp.h.hex()))
                })
                .collect()
        })
        .collect();
    let mut by_digest: BTreeMap<&str, Vec<(usize, bool)>> = BTreeMap::new();
    for (i, exact, d) in hits.into_iter().flatten() {
        by_digest.entry(d).or_default().push((i, exact));
    }
    by_digest
}

/// A pair (target function, library function) is similar when their digest
/// distance is below `th_hash`. A version qualifies when its similar-pair
/// count over its own function count exceeds `th_sim`; per library the
/// qualifying version with the most pairs is reported. Pairs at distance 0
/// rank first and the higher ratio breaks ties, so a verbatim copy selects
/// its own version over near matches and supersets; what remains tied is
/// settled by a generator seeded with `seed`.
pub fn detect_candidates(
    target: &[TargetSnippet],
    segment: &ComponentSegment,
    th_hash: u32,
    th_sim: f64,
    seed: u64,
) -> Vec<ReuseCandidate> {
    let pairs = similar_pairs(target, segment, th_hash);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (tpl, versions) in &segment.tpls {
        let mut qualifying = Vec::new();
        for record in versions {
            if record.fc.is_empty() {
                continue;
            }
            let mut cand = ReuseCandidate {
                tpl_name: tpl.clone(),
                version: record.version_tag.clone(),
                similar_pairs: 0,
                exact_pairs: 0,
                ratio: 0.0,
                matched_paths: BTreeSet::new(),
                evidence: BTreeSet::new(),
                matched_snippets: BTreeSet::new(),
                birth: DateTime::<Utc>::MAX_UTC,
            };
            for fp in &record.fc {
                let Some(hits) = pairs.get(fp.h.hex()) else { continue };
                cand.similar_pairs += hits.len();
                cand.birth = cand.birth.min(fp.birth);
                for &(i, exact) in hits {
                    cand.exact_pairs += usize::from(exact);
                    cand.matched_paths.insert(target[i].func_path.clone());
                    cand.evidence.insert(target[i].hash.to_string());
                    cand.matched_snippets.insert(i);
                }
            }
            cand.ratio = cand.similar_pairs as f64 / record.fc.len() as f64;
            if cand.similar_pairs > 0 && cand.ratio > th_sim {
                qualifying.push(cand);
            }
        }
        let rank = |a: &ReuseCandidate, b: &ReuseCandidate| {
            (a.exact_pairs, a.similar_pairs).cmp(&(b.exact_pairs, b.similar_pairs)).then(a.ratio.total_cmp(&b.ratio))
        };
        let Some(best) = qualifying.iter().max_by(|a, b| rank(a, b)).cloned() else { continue };
        let tied: Vec<ReuseCandidate> = qualifying.into_iter().filter(|c| rank(c, &best).is_eq()).collect();
        out.push(tied.choose(&mut rng).cloned().expect("non-empty"));
    }
    out
}

fn tokens(s: &str) -> BTreeSet<String> {
    s.split([' ', '/', '\\', ':', '.', '-', '_'])
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Jaccard similarity between the tokens of a path and of a library name.
pub fn jaccard_path_score(func_path: &str, tpl_name: &str) -> f64 {
    let (a, b) = (tokens(func_path), tokens(tpl_name));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Prune candidates that only appear because they bundle another library.
///
/// For every target path claimed by several candidates, only those whose
/// name best matches the path keep it; candidates left with no path are
/// dropped. Then, of the survivors that share a paired target function, only
/// the one born earliest is kept.
pub fn resolve_reuses(target_id: &str, candidates: &[ReuseCandidate]) -> ReuseReport {
    let mut by_path: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        for p in &c.matched_paths {
            by_path.entry(p).or_default().push(i);
        }
    }
    let mut kept_paths: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); candidates.len()];
    for (path, owners) in &by_path {
        let score = |i: usize| jaccard_path_score(path, &candidates[i].tpl_name);
        let best = owners.iter().map(|&i| score(i)).fold(f64::MIN, f64::max);
        for &i in owners {
            if score(i) == best {
                kept_paths[i].insert(path);
            }
        }
    }

    let survivors: Vec<usize> = (0..candidates.len()).filter(|&i| !kept_paths[i].is_empty()).collect();
    let rank = |i: usize| (candidates[i].birth, &candidates[i].tpl_name, &candidates[i].version);
    let mut confirmed: Vec<ConfirmedReuse> = survivors
        .iter()
        .filter(|&&i| {
            !survivors
                .iter()
                .any(|&j| j != i && rank(j) < rank(i) && !candidates[i].evidence.is_disjoint(&candidates[j].evidence))
        })
        .map(|&i| {
            let c = &candidates[i];
            ConfirmedReuse {
                tpl_name: c.tpl_name.clone(),
                version: c.version.clone(),
                evidence_paths: kept_paths[i].iter().map(|p| p.to_string()).collect(),
                pair_count: c.similar_pairs,
                matched_snippets: c.matched_snippets.clone(),
            }
        })
        .collect();
    confirmed.sort_by(|a, b| (&a.tpl_name, &a.version).cmp(&(&b.tpl_name, &b.version)));
    ReuseReport { target_id: target_id.to_string(), confirmed }
}
