//! Source-level model of C/C++ code: snippet extraction, normalization,
//! fuzzy digests and per-statement facts.

pub mod digest;
pub mod extract;
pub mod facts;
pub mod lexer;
pub mod normalize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use digest::{digest, distance, distance_or_infinite, FuzzyDigest, INFINITE_DISTANCE};
pub use extract::{extract_snippets, Extraction};
pub use facts::{annotate_lines, block_structure, statement_facts, StatementFacts};
pub use normalize::{normalize, normalize_text};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeModelError {
    #[error("{path}:{line}: function body is never closed")]
    UnbalancedBraces { path: String, line: usize },
    #[error("cannot compare a TLSH digest with an exact hash")]
    AlgorithmMismatch,
    #[error("no catalog pattern matches part of `{0}`")]
    UnclassifiedStatement(String),
    #[error("malformed digest `{0}`")]
    BadDigest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnippetKind {
    Function,
    GlobalDecl,
}

/// A top-level function or global declaration cut out of a source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSnippet {
    pub kind: SnippetKind,
    pub name: String,
    pub body: String,
    pub normalized_body: String,
    pub file_path: String,
    /// 1-based, inclusive.
    pub line_span: (usize, usize),
}

impl SourceSnippet {
    pub fn digest(&self) -> FuzzyDigest {
        digest(&self.normalized_body)
    }

    pub fn normalized_lines(&self) -> Vec<&str> {
        self.normalized_body.lines().collect()
    }
}

/// File extensions treated as C/C++ sources.
pub const SOURCE_EXTENSIONS: [&str; 9] = ["c", "h", "cc", "cpp", "cxx", "hpp", "hh", "hxx", "inl"];

pub fn is_source_path(path: &std::path::Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}
