//! Patch-presence decisions: global-declaration line checks and chunk
//! matching for custom reuse.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::chunks::{build_chunks, Chunk};
use crate::diff::LineDiff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Secure,
    Patched,
    Vulnerable,
    /// Reused code changed beyond what digest pairing can follow.
    Unanalyzed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    /// Decided without chunks: empty patch, or target equal to one side.
    Trivial,
    LineMatch,
    OperationMatch,
    /// Both matches failed.
    NoMatch,
}

/// The three diffs between vulnerable, patched and target code, with their
/// chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSet {
    pub vulnerable: Vec<String>,
    pub patched: Vec<String>,
    pub target: Vec<String>,
    pub diff_vp: LineDiff,
    pub diff_vt: LineDiff,
    pub diff_pt: LineDiff,
    pub chunks_vp: Vec<Chunk>,
    pub chunks_vt: Vec<Chunk>,
    pub chunks_pt: Vec<Chunk>,
}

impl DiffSet {
    /// Build from normalized bodies.
    pub fn new(vulnerable: &str, patched: &str, target: &str) -> Self {
        let lines = |s: &str| s.lines().map(String::from).collect::<Vec<_>>();
        let (v, p, t) = (lines(vulnerable), lines(patched), lines(target));
        let (vr, pr, tr) = (refs(&v), refs(&p), refs(&t));
        let diff_vp = LineDiff::compute(&vr, &pr);
        let diff_vt = LineDiff::compute(&vr, &tr);
        let diff_pt = LineDiff::compute(&pr, &tr);
        let chunks_vp = build_chunks(&diff_vp, &vr, &pr);
        let chunks_vt = build_chunks(&diff_vt, &vr, &tr);
        let chunks_pt = build_chunks(&diff_pt, &pr, &tr);
        Self { vulnerable: v, patched: p, target: t, diff_vp, diff_vt, diff_pt, chunks_vp, chunks_vt, chunks_pt }
    }
}

fn refs(x: &[String]) -> Vec<&str> {
    x.iter().map(String::as_str).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub verdict: Verdict,
    pub method: MatchMethod,
    /// Ids of Diff_vp chunks whose operations were found in the target.
    pub matched_chunks: Vec<usize>,
    pub unmatched_chunks: Vec<usize>,
}

fn counts<'a>(lines: impl Iterator<Item = &'a str>) -> HashMap<&'a str, usize> {
    let mut m = HashMap::new();
    for l in lines {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

/// `needle` occurs as a contiguous run inside `hay`.
pub fn contains_run(hay: &[String], needle: &[String]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

/// Chunk of `pool` sharing the most variables with `c`; for a chunk without
/// shared variables, the first one containing its operations.
fn pair<'a>(c: &Chunk, pool: &'a [Chunk]) -> Option<&'a Chunk> {
    let mut best: Option<(&Chunk, usize)> = None;
    for e in pool {
        let overlap = c.variables.intersection(&e.variables).count();
        if overlap > 0 && best.is_none_or(|(_, b)| overlap > b) {
            best = Some((e, overlap));
        }
    }
    if let Some((e, _)) = best {
        return Some(e);
    }
    let (add, del) = (c.added_ops(), c.deleted_ops());
    if add.is_empty() && del.is_empty() {
        return None;
    }
    pool.iter().find(|e| {
        (add.is_empty() || contains_run(&e.added_ops(), &add) || contains_run(&e.deleted_ops(), &add))
            && (del.is_empty() || contains_run(&e.deleted_ops(), &del) || contains_run(&e.added_ops(), &del))
    })
}

fn line_match(ds: &DiffSet) -> bool {
    let vt_added = counts(ds.diff_vt.added().map(|l| l.text.as_str()));
    let pt_lines = counts(ds.diff_pt.lines().map(|l| l.text.as_str()));
    let target = counts(ds.target.iter().map(String::as_str));
    let patched = counts(ds.patched.iter().map(String::as_str));
    let added_ok = ds.diff_vp.added().all(|l| vt_added.contains_key(l.text.as_str()) && !pt_lines.contains_key(l.text.as_str()));
    // A removed line may legitimately survive elsewhere in the function, as
    // long as the target has no more copies than the patched code.
    let deleted_ok = ds
        .diff_vp
        .deleted()
        .all(|l| target.get(l.text.as_str()).copied().unwrap_or(0) <= patched.get(l.text.as_str()).copied().unwrap_or(0));
    added_ok && deleted_ok
}

fn chunk_patched(c: &Chunk, ds: &DiffSet) -> bool {
    let (add, del) = (c.added_ops(), c.deleted_ops());
    let Some(e) = pair(c, &ds.chunks_vt) else {
        return false;
    };
    if !contains_run(&e.added_ops(), &add) || !contains_run(&e.deleted_ops(), &del) {
        return false;
    }
    if let Some(f) = pair(c, &ds.chunks_pt) {
        let (f_add, f_del) = (f.added_ops(), f.deleted_ops());
        let patch_missing = !add.is_empty() && contains_run(&f_del, &add) && !contains_run(&f_add, &add);
        let flaw_restored = !del.is_empty() && contains_run(&f_add, &del) && !contains_run(&f_del, &del);
        if patch_missing || flaw_restored {
            return false;
        }
    }
    true
}

/// Decide whether the target carries the patch.
///
/// Line match: every line the patch adds is among the target's additions
/// over the vulnerable code and absent from its differences to the patched
/// code, and no line the patch removes remains. Operation match: every
/// patch chunk's added (and removed) operation sequence occurs contiguously
/// in its paired target chunk over the vulnerable code, and its paired chunk
/// against the patched code does not show the patch logic as missing.
pub fn match_chunks(ds: &DiffSet) -> MatchOutcome {
    let trivial = |verdict| MatchOutcome { verdict, method: MatchMethod::Trivial, matched_chunks: vec![], unmatched_chunks: vec![] };
    if ds.diff_vp.is_empty() || ds.diff_pt.is_empty() {
        return trivial(Verdict::Patched);
    }
    if ds.diff_vt.is_empty() {
        return MatchOutcome { unmatched_chunks: ds.chunks_vp.iter().map(|c| c.id).collect(), ..trivial(Verdict::Vulnerable) };
    }
    if line_match(ds) {
        return MatchOutcome {
            verdict: Verdict::Patched,
            method: MatchMethod::LineMatch,
            matched_chunks: ds.chunks_vp.iter().map(|c| c.id).collect(),
            unmatched_chunks: vec![],
        };
    }
    let (matched, unmatched): (Vec<&Chunk>, Vec<&Chunk>) = ds.chunks_vp.iter().partition(|c| chunk_patched(c, ds));
    let ok = unmatched.is_empty() && !matched.is_empty();
    MatchOutcome {
        verdict: if ok { Verdict::Patched } else { Verdict::Vulnerable },
        method: if ok { MatchMethod::OperationMatch } else { MatchMethod::NoMatch },
        matched_chunks: matched.iter().map(|c| c.id).collect(),
        unmatched_chunks: unmatched.iter().map(|c| c.id).collect(),
    }
}

/// Global declarations: vulnerable if a line the patch deleted is still in
/// the target, or a line it added is missing.
pub fn check_global_decls(target_decl_lines: &[&str], diff_vp: &LineDiff) -> Verdict {
    let present = |line: &str| target_decl_lines.contains(&line);
    if diff_vp.deleted().any(|l| present(&l.text)) || diff_vp.added().any(|l| !present(&l.text)) {
        Verdict::Vulnerable
    } else {
        Verdict::Patched
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VULN: &str = "int get(int *t, int i)\n{\nint v;\nv = t[i];\nreturn v;\n}";
    const PATCHED: &str = "int get(int *t, int i)\n{\nint v;\nif (i < 0)\nreturn -1;\nv = t[i];\nreturn v;\n}";

    #[test]
    fn trivial_cases() {
        assert_eq!(match_chunks(&DiffSet::new(VULN, PATCHED, PATCHED)).verdict, Verdict::Patched);
        assert_eq!(match_chunks(&DiffSet::new(VULN, PATCHED, VULN)).verdict, Verdict::Vulnerable);
    }

    #[test]
    fn line_match_with_unrelated_edit() {
        let target = PATCHED.replace("return v;", "log_access(i);\nreturn v;");
        let out = match_chunks(&DiffSet::new(VULN, PATCHED, &target));
        assert_eq!((out.verdict, out.method), (Verdict::Patched, MatchMethod::LineMatch));
    }

    #[test]
    fn reformatted_patch_needs_operation_match() {
        let target = PATCHED.replace("if (i < 0)", "if(i<0)");
        let out = match_chunks(&DiffSet::new(VULN, PATCHED, &target));
        assert_eq!((out.verdict, out.method), (Verdict::Patched, MatchMethod::OperationMatch));
    }

    #[test]
    fn custom_edit_without_patch() {
        let target = VULN.replace("return v;", "log_access(i);\nreturn v;");
        let out = match_chunks(&DiffSet::new(VULN, PATCHED, &target));
        assert_eq!(out.verdict, Verdict::Vulnerable);
    }

    #[test]
    fn declarations() {
        let vp = LineDiff::between("#define MAX 4", "#define MAX 8");
        assert_eq!(check_global_decls(&["#define MAX 4"], &vp), Verdict::Vulnerable);
        assert_eq!(check_global_decls(&["#define MAX 8"], &vp), Verdict::Patched);
        assert_eq!(check_global_decls(&[], &vp), Verdict::Vulnerable);
    }

    #[test]
    fn runs() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(contains_run(&s(&["if", "<", "return", "-"]), &s(&["<", "return"])));
        assert!(!contains_run(&s(&["if", "<", "return"]), &s(&["if", "return"])));
        assert!(contains_run(&s(&[]), &s(&[])));
    }
}
