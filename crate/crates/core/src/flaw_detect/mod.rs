//! 1-day vulnerability detection over identified reuses: version-based
//! grouping of the reused code, then chunk matching for custom reuse.

mod chunks;
mod matching;
mod report;
mod scope;

use serde::{Deserialize, Serialize};

use crate::code_model::{digest, distance_or_infinite, SnippetKind};
use crate::reuse_id::TargetSnippet;

pub use chunks::{build_chunks, BlockRef, Chunk, ChunkLine};
pub use matching::{check_global_decls, contains_run, match_chunks, DiffSet, MatchMethod, MatchOutcome, Verdict};
pub use report::{exit_code, generate_report, Location, VulnFinding, VulnReport, REPORT_SCHEMA_VERSION};
pub use scope::{version_diff, version_diff_files, OrphanHunk, PatchScope, ScopeItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    /// No vulnerable reuse.
    G1,
    /// Vulnerable global declaration reuse.
    G2,
    /// Exact vulnerable reuse.
    G3,
    /// Custom reuse.
    G4,
}

impl Group {
    fn precedence(self) -> u8 {
        match self {
            Group::G3 => 3,
            Group::G2 => 2,
            Group::G4 => 1,
            Group::G1 => 0,
        }
    }
}

/// Outcome for one target snippet against one patch scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// Index into the target snippet list.
    pub snippet: usize,
    /// Index into the scope's items.
    pub item: usize,
    pub group: Group,
    pub verdict: Verdict,
    pub outcome: Option<MatchOutcome>,
}

fn classify_one(t: &TargetSnippet, item: &ScopeItem, th_hash: u32, decl_lines: &[&str]) -> Option<(Group, Verdict, Option<MatchOutcome>, u32)> {
    if t.kind != item.kind {
        return None;
    }
    let body = t.normalized_body.as_str();
    let (vuln, patched) = (item.vulnerable.as_deref(), item.patched.as_deref());
    match item.kind {
        SnippetKind::GlobalDecl => {
            if vuln == Some(body) {
                Some((Group::G2, check_global_decls(decl_lines, &item.diff_vp()), None, 0))
            } else if patched == Some(body) {
                Some((Group::G1, Verdict::Secure, None, 0))
            } else {
                None
            }
        }
        SnippetKind::Function => {
            if vuln == Some(body) {
                return Some((Group::G3, Verdict::Vulnerable, None, 0));
            }
            if patched == Some(body) {
                return Some((Group::G1, Verdict::Secure, None, 0));
            }
            let near = [vuln, patched].into_iter().flatten().map(|b| distance_or_infinite(&t.hash, &digest(b))).min();
            match near {
                Some(d) if d < th_hash => {
                    let ds = DiffSet::new(vuln.unwrap_or(""), patched.unwrap_or(""), body);
                    let out = match_chunks(&ds);
                    Some((Group::G4, out.verdict, Some(out), d))
                }
                _ if t.name == item.name && vuln.is_some() => Some((Group::G4, Verdict::Unanalyzed, None, u32::MAX)),
                _ => None,
            }
        }
    }
}

/// Group every target snippet that overlaps the patch scope.
///
/// Functions equal to a vulnerable body are G3 and equal to a patched body
/// G1; functions within `th_hash` of either are G4 and decided by chunk
/// matching; a same-named function that pairs with neither is G4
/// Unanalyzed. Declarations equal to a vulnerable declaration are G2 and
/// decided line by line against all of the target's declarations. When a
/// snippet overlaps several items the highest group wins
/// (G3 > G2 > G4 > G1), then the nearest item.
pub fn classify_reuse(targets: &[TargetSnippet], candidates: &[usize], scope: &PatchScope, th_hash: u32) -> Vec<Classification> {
    let decl_lines: Vec<&str> = candidates
        .iter()
        .map(|&i| &targets[i])
        .filter(|t| t.kind == SnippetKind::GlobalDecl)
        .flat_map(|t| t.normalized_body.lines())
        .collect();
    let mut out = Vec::new();
    for &i in candidates {
        let t = &targets[i];
        let best = scope
            .items
            .iter()
            .enumerate()
            .filter_map(|(k, item)| classify_one(t, item, th_hash, &decl_lines).map(|c| (k, c)))
            .max_by(|(ka, a), (kb, b)| a.0.precedence().cmp(&b.0.precedence()).then(b.3.cmp(&a.3)).then(kb.cmp(ka)));
        if let Some((item, (group, verdict, outcome, _))) = best {
            out.push(Classification { snippet: i, item, group, verdict, outcome });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reuse_id::snippets_of;

    const VULN: &str = "int get_item(int *table, int idx, int count)\n{\n    int v;\n    v = table[idx];\n    return v * count + 1;\n}\n";
    const PATCHED: &str = "int get_item(int *table, int idx, int count)\n{\n    int v;\n    if (idx >= count)\n        return -1;\n    v = table[idx];\n    return v * count + 1;\n}\n";

    fn scope() -> PatchScope {
        version_diff_files("lib/item.c", Some(VULN), Some(PATCHED))
    }

    fn classify(src: &str) -> Vec<Classification> {
        let targets = snippets_of(src, "vendor/item.c");
        let all: Vec<usize> = (0..targets.len()).collect();
        classify_reuse(&targets, &all, &scope(), 30)
    }

    #[test]
    fn exact_copies() {
        let v = classify(VULN);
        assert_eq!((v[0].group, v[0].verdict), (Group::G3, Verdict::Vulnerable));
        let p = classify(PATCHED);
        assert_eq!((p[0].group, p[0].verdict), (Group::G1, Verdict::Secure));
    }

    #[test]
    fn unrelated_code_is_not_classified() {
        assert!(classify("void other(void)\n{\n    puts(\"x\");\n}\n").is_empty());
    }

    #[test]
    fn rewritten_function_is_unanalyzed() {
        let c = classify("int get_item(int *t, int i, int n)\n{\n    return n;\n}\n");
        assert_eq!((c[0].group, c[0].verdict), (Group::G4, Verdict::Unanalyzed));
    }

    #[test]
    fn global_declarations() {
        let scope = version_diff_files("cfg.h", Some("#define MAX 4\n"), Some("#define MAX 8\n"));
        let targets = snippets_of("#define MAX 4\n", "cfg.h");
        let c = classify_reuse(&targets, &[0], &scope, 30);
        assert_eq!((c[0].group, c[0].verdict), (Group::G2, Verdict::Vulnerable));
        let targets = snippets_of("#define MAX 8\n", "cfg.h");
        let c = classify_reuse(&targets, &[0], &scope, 30);
        assert_eq!((c[0].group, c[0].verdict), (Group::G1, Verdict::Secure));
    }
}
