use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::code_model::{extract_snippets, is_source_path, FuzzyDigest, SnippetKind, SourceSnippet};

/// One function (or global declaration) of the scanned program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSnippet {
    pub hash: FuzzyDigest,
    /// Relative to the target root, `/`-separated.
    pub func_path: String,
    pub name: String,
    pub line_span: (usize, usize),
    pub kind: SnippetKind,
    #[serde(skip)]
    pub normalized_body: String,
}

impl From<SourceSnippet> for TargetSnippet {
    fn from(s: SourceSnippet) -> Self {
        TargetSnippet {
            hash: s.digest(),
            func_path: s.file_path,
            name: s.name,
            line_span: s.line_span,
            kind: s.kind,
            normalized_body: s.normalized_body,
        }
    }
}

impl TargetSnippet {
    pub fn is_function(&self) -> bool {
        self.kind == SnippetKind::Function
    }
}

/// Snippets of one file's text.
pub fn snippets_of(text: &str, func_path: &str) -> Vec<TargetSnippet> {
    extract_snippets(text, func_path).snippets.into_iter().map(TargetSnippet::from).collect()
}

/// Extract every C/C++ file below `root`, in path order. Non-UTF-8 bytes
/// are replaced.
pub fn collect_target(root: &Path) -> io::Result<Vec<TargetSnippet>> {
    if !root.is_dir() {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("{} is not a directory", root.display())));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        if !entry.file_type().is_file() || !is_source_path(entry.path()) {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        let bytes = fs::read(entry.path())?;
        out.extend(snippets_of(&String::from_utf8_lossy(&bytes), &rel));
    }
    Ok(out)
}
