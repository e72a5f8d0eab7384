//! Version-based view of a patch: which functions and global declarations
//! it changes, captured whole on both sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::code_model::{extract_snippets, normalize_text, SnippetKind, SourceSnippet};
use crate::diff::{LineDiff, Side};

/// One function or declaration changed by a patch. Bodies are normalized;
/// `None` means the item does not exist on that side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeItem {
    pub kind: SnippetKind,
    pub name: String,
    pub file_path: String,
    pub vulnerable: Option<String>,
    pub patched: Option<String>,
}

impl ScopeItem {
    pub fn diff_vp(&self) -> LineDiff {
        LineDiff::between(self.vulnerable.as_deref().unwrap_or(""), self.patched.as_deref().unwrap_or(""))
    }
}

/// A changed region of a file that belongs to no function or declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrphanHunk {
    pub file_path: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchScope {
    pub items: Vec<ScopeItem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orphans: Vec<OrphanHunk>,
}

impl PatchScope {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty() && self.orphans.is_empty()
    }

    pub fn merge(&mut self, other: PatchScope) {
        self.items.extend(other.items);
        self.orphans.extend(other.orphans);
    }

    fn bodies(&self, kind: SnippetKind, vulnerable: bool) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| i.kind == kind)
            .filter_map(|i| if vulnerable { i.vulnerable.as_deref() } else { i.patched.as_deref() })
            .collect()
    }

    pub fn vuln_functions(&self) -> Vec<&str> {
        self.bodies(SnippetKind::Function, true)
    }

    pub fn patched_functions(&self) -> Vec<&str> {
        self.bodies(SnippetKind::Function, false)
    }

    pub fn vuln_decls(&self) -> Vec<&str> {
        self.bodies(SnippetKind::GlobalDecl, true)
    }

    pub fn patched_decls(&self) -> Vec<&str> {
        self.bodies(SnippetKind::GlobalDecl, false)
    }

    /// Line diff over all declarations, vulnerable side to patched side.
    pub fn decl_diff_vp(&self) -> LineDiff {
        LineDiff::between(&self.vuln_decls().join("\n"), &self.patched_decls().join("\n"))
    }
}

type Key = (SnippetKind, String, String, usize);

fn keyed(snippets: &[SourceSnippet]) -> BTreeMap<Key, &SourceSnippet> {
    let mut seen: BTreeMap<(SnippetKind, String, String), usize> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for s in snippets {
        let n = seen.entry((s.kind, s.file_path.clone(), s.name.clone())).or_default();
        out.insert((s.kind, s.file_path.clone(), s.name.clone(), *n), s);
        *n += 1;
    }
    out
}

/// Pair snippets of the two versions by kind, file and name (repeated names
/// by occurrence) and keep every pair whose normalized bodies differ, plus
/// items present on one side only.
pub fn version_diff(vulnerable_src: &[SourceSnippet], patched_src: &[SourceSnippet]) -> PatchScope {
    let (old, new) = (keyed(vulnerable_src), keyed(patched_src));
    let mut keys: Vec<&Key> = old.keys().chain(new.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut scope = PatchScope::default();
    for key in keys {
        let (a, b) = (old.get(key), new.get(key));
        if let (Some(a), Some(b)) = (a, b) {
            if a.normalized_body == b.normalized_body {
                continue;
            }
        }
        scope.items.push(ScopeItem {
            kind: key.0,
            name: key.2.clone(),
            file_path: key.1.clone(),
            vulnerable: a.map(|s| s.normalized_body.clone()),
            patched: b.map(|s| s.normalized_body.clone()),
        });
    }
    scope
}

/// [`version_diff`] over two revisions of one file, also reporting hunks
/// that fall outside every snippet.
pub fn version_diff_files(path: &str, old: Option<&str>, new: Option<&str>) -> PatchScope {
    let (old, new) = (old.unwrap_or(""), new.unwrap_or(""));
    let old_snips = extract_snippets(old, path).snippets;
    let new_snips = extract_snippets(new, path).snippets;
    let mut scope = version_diff(&old_snips, &new_snips);

    let covered = |snips: &[SourceSnippet], line: usize| snips.iter().any(|s| s.line_span.0 <= line && line <= s.line_span.1);
    for hunk in LineDiff::between(old, new).hunks {
        let meaningful: Vec<_> = hunk.lines.iter().filter(|l| !normalize_text(&l.text).is_empty()).collect();
        if meaningful.is_empty() {
            continue;
        }
        let inside = meaningful.iter().any(|l| match l.side {
            Side::Deleted => covered(&old_snips, l.index + 1),
            Side::Added => covered(&new_snips, l.index + 1),
        });
        if !inside {
            let line = meaningful[0].index + 1;
            log::warn!("{path}:{line}: change outside any function or declaration");
            scope.orphans.push(OrphanHunk { file_path: path.to_string(), line });
        }
    }
    scope
}

#[cfg(test)]
mod tests {
    use super::*;

    const VULN: &str = "#define MAX 4\nstatic int table[MAX];\n\nint get(int i)\n{\n    return table[i];\n}\n\nint other(void)\n{\n    return 7;\n}\n";

    #[test]
    fn function_change_captures_whole_function() {
        let patched = VULN.replace("    return table[i];", "    if (i < 0 || i >= MAX)\n        return -1;\n    return table[i];");
        let scope = version_diff_files("t.c", Some(VULN), Some(&patched));
        assert_eq!(scope.items.len(), 1);
        let item = &scope.items[0];
        assert_eq!((item.kind, item.name.as_str()), (SnippetKind::Function, "get"));
        assert_eq!(item.vulnerable.as_deref(), Some("int get(int i)\n{\nreturn table[i];\n}"));
        assert!(item.patched.as_deref().unwrap().contains("if (i < 0 || i >= MAX)"));
        assert!(scope.orphans.is_empty());
    }

    #[test]
    fn macro_only_patch() {
        let patched = VULN.replace("#define MAX 4", "#define MAX 8");
        let scope = version_diff_files("t.c", Some(VULN), Some(&patched));
        assert_eq!(scope.vuln_decls(), ["#define MAX 4"]);
        assert_eq!(scope.patched_decls(), ["#define MAX 8"]);
        assert!(scope.vuln_functions().is_empty());
    }

    #[test]
    fn identical_inputs() {
        let scope = version_diff_files("t.c", Some(VULN), Some(VULN));
        assert!(scope.is_empty());
    }

    #[test]
    fn stray_tokens_are_orphans() {
        let patched = format!("{VULN}#pragma once\n");
        let scope = version_diff_files("t.c", Some(VULN), Some(&patched));
        assert!(scope.items.is_empty());
        assert_eq!(scope.orphans, [OrphanHunk { file_path: "t.c".into(), line: 13 }]);
    }
}
