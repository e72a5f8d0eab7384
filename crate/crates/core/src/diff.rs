//! Line diffs between normalized texts, and a parser for unified diff text
//! as produced by `git diff`.

use serde::{Deserialize, Serialize};
use similar::{DiffTag, TextDiff};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Added,
    Deleted,
}

/// One changed line. `index` is the 0-based line index in the old text for
/// deleted lines and in the new text for added lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub side: Side,
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub lines: Vec<DiffLine>,
}

impl Hunk {
    pub fn added(&self) -> impl Iterator<Item = &DiffLine> {
        self.lines.iter().filter(|l| l.side == Side::Added)
    }

    pub fn deleted(&self) -> impl Iterator<Item = &DiffLine> {
        self.lines.iter().filter(|l| l.side == Side::Deleted)
    }
}

/// Ordered hunks of a line diff.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDiff {
    pub hunks: Vec<Hunk>,
}

impl LineDiff {
    pub fn compute(old: &[&str], new: &[&str]) -> Self {
        let diff = similar::capture_diff_slices(similar::Algorithm::Myers, old, new);
        let mut hunks: Vec<Hunk> = Vec::new();
        let mut current = Hunk::default();
        for op in diff {
            let (tag, old_range, new_range) = op.as_tag_tuple();
            if tag == DiffTag::Equal {
                if !current.lines.is_empty() {
                    hunks.push(std::mem::take(&mut current));
                }
                continue;
            }
            for i in old_range {
                current.lines.push(DiffLine { side: Side::Deleted, index: i, text: old[i].to_string() });
            }
            for i in new_range {
                current.lines.push(DiffLine { side: Side::Added, index: i, text: new[i].to_string() });
            }
        }
        if !current.lines.is_empty() {
            hunks.push(current);
        }
        LineDiff { hunks }
    }

    pub fn between(old: &str, new: &str) -> Self {
        let old: Vec<&str> = old.lines().collect();
        let new: Vec<&str> = new.lines().collect();
        Self::compute(&old, &new)
    }

    pub fn is_empty(&self) -> bool {
        self.hunks.is_empty()
    }

    pub fn lines(&self) -> impl Iterator<Item = &DiffLine> {
        self.hunks.iter().flat_map(|h| h.lines.iter())
    }

    pub fn added(&self) -> impl Iterator<Item = &DiffLine> {
        self.lines().filter(|l| l.side == Side::Added)
    }

    pub fn deleted(&self) -> impl Iterator<Item = &DiffLine> {
        self.lines().filter(|l| l.side == Side::Deleted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffParseError {
    #[error("line {0}: hunk header outside of a file section")]
    HunkWithoutFile(usize),
    #[error("line {0}: malformed hunk header")]
    BadHunkHeader(usize),
    #[error("line {0}: hunk body does not match its header counts")]
    HunkLengthMismatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    Context,
    Added,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnifiedHunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub section: String,
    pub lines: Vec<(LineKind, String)>,
}

/// Changes to one file. Paths have their `a/` / `b/` prefixes removed;
/// `None` stands for `/dev/null`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilePatch {
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    pub hunks: Vec<UnifiedHunk>,
}

impl FilePatch {
    /// The path that best names the file (new path unless deleted).
    pub fn path(&self) -> &str {
        self.new_path
            .as_deref()
            .or(self.old_path.as_deref())
            .unwrap_or("")
    }

    pub fn changed_lines(&self) -> impl Iterator<Item = (LineKind, &str)> {
        self.hunks
            .iter()
            .flat_map(|h| h.lines.iter())
            .filter(|(k, _)| *k != LineKind::Context)
            .map(|(k, t)| (*k, t.as_str()))
    }
}

fn strip_path(raw: &str) -> Option<String> {
    let raw = raw.split('\t').next().unwrap_or(raw).trim_end();
    if raw == "/dev/null" {
        return None;
    }
    let raw = raw.trim_matches('"');
    Some(
        raw.strip_prefix("a/")
            .or_else(|| raw.strip_prefix("b/"))
            .unwrap_or(raw)
            .to_string(),
    )
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    let mut parts = s.splitn(2, ',');
    let start = parts.next()?.parse().ok()?;
    let len = match parts.next() {
        Some(l) => l.parse().ok()?,
        None => 1,
    };
    Some((start, len))
}

fn parse_hunk_header(line: &str) -> Option<UnifiedHunk> {
    let rest = line.strip_prefix("@@ -")?;
    let (old, rest) = rest.split_once(" +")?;
    let (new, section) = rest.split_once(" @@")?;
    let (old_start, old_len) = parse_range(old)?;
    let (new_start, new_len) = parse_range(new)?;
    Some(UnifiedHunk {
        old_start,
        old_len,
        new_start,
        new_len,
        section: section.trim().to_string(),
        lines: Vec::new(),
    })
}

/// Parse unified diff text. Unknown header lines (`index`, mode changes,
/// `similarity index`, ...) are skipped.
pub fn parse_unified(text: &str) -> Result<Vec<FilePatch>, DiffParseError> {
    let mut files: Vec<FilePatch> = Vec::new();
    let lines = text.lines().enumerate();
    // Lines still expected in the current hunk: (old, new).
    let mut remaining: Option<(usize, usize)> = None;

    for (no, line) in lines {
        let lineno = no + 1;
        if let Some((old_left, new_left)) = remaining {
            if old_left == 0 && new_left == 0 {
                remaining = None;
            } else {
                let hunk = files
                    .last_mut()
                    .and_then(|f| f.hunks.last_mut())
                    .expect("remaining implies an open hunk");
                let (kind, body) = match line.as_bytes().first() {
                    Some(b'+') => (LineKind::Added, &line[1..]),
                    Some(b'-') => (LineKind::Removed, &line[1..]),
                    Some(b' ') => (LineKind::Context, &line[1..]),
                    None => (LineKind::Context, ""),
                    Some(b'\\') => continue,
                    _ => return Err(DiffParseError::HunkLengthMismatch(lineno)),
                };
                let (need_old, need_new) = match kind {
                    LineKind::Added => (0, 1),
                    LineKind::Removed => (1, 0),
                    LineKind::Context => (1, 1),
                };
                if old_left < need_old || new_left < need_new {
                    return Err(DiffParseError::HunkLengthMismatch(lineno));
                }
                hunk.lines.push((kind, body.to_string()));
                remaining = Some((old_left - need_old, new_left - need_new));
                continue;
            }
        }

        if line.starts_with("diff --git ") {
            files.push(FilePatch::default());
            let rest = &line["diff --git ".len()..];
            if let Some((a, b)) = rest.split_once(" b/") {
                let f = files.last_mut().unwrap();
                f.old_path = strip_path(a);
                f.new_path = strip_path(&format!("b/{b}"));
            }
        } else if let Some(path) = line.strip_prefix("--- ") {
            let is_new_section = files.last().is_none_or(|f| !f.hunks.is_empty());
            if is_new_section {
                files.push(FilePatch::default());
            }
            files.last_mut().unwrap().old_path = strip_path(path);
        } else if let Some(path) = line.strip_prefix("+++ ") {
            let f = files.last_mut().ok_or(DiffParseError::HunkWithoutFile(lineno))?;
            f.new_path = strip_path(path);
        } else if line.starts_with("@@") {
            let hunk = parse_hunk_header(line).ok_or(DiffParseError::BadHunkHeader(lineno))?;
            remaining = Some((hunk.old_len, hunk.new_len));
            files
                .last_mut()
                .ok_or(DiffParseError::HunkWithoutFile(lineno))?
                .hunks
                .push(hunk);
        } else if line.starts_with("deleted file mode") {
            if let Some(f) = files.last_mut() {
                f.new_path = None;
            }
        } else if line.starts_with("new file mode") {
            if let Some(f) = files.last_mut() {
                f.old_path = None;
            }
        }
    }

    if let Some((o, n)) = remaining {
        if o != 0 || n != 0 {
            return Err(DiffParseError::HunkLengthMismatch(text.lines().count()));
        }
    }
    Ok(files)
}

/// Render a unified diff of one file, `git diff` style (three lines of
/// context, `a/` and `b/` prefixes). Returns an empty string when the
/// contents are identical.
pub fn render_unified(path: &str, old: Option<&str>, new: Option<&str>) -> String {
    let (o, n) = (old.unwrap_or(""), new.unwrap_or(""));
    if old == new {
        return String::new();
    }
    let diff = TextDiff::from_lines(o, n);
    let mut out = format!("diff --git a/{path} b/{path}\n");
    if old.is_none() {
        out.push_str("new file mode 100644\n");
    } else if new.is_none() {
        out.push_str("deleted file mode 100644\n");
    }
    let a = if old.is_some() { format!("a/{path}") } else { "/dev/null".to_string() };
    let b = if new.is_some() { format!("b/{path}") } else { "/dev/null".to_string() };
    out.push_str(&format!("--- {a}\n+++ {b}\n"));
    for hunk in diff.unified_diff().context_radius(3).iter_hunks() {
        let header = hunk.header().to_string();
        out.push_str(&header);
        out.push('\n');
        for change in hunk.iter_changes() {
            let sign = match change.tag() {
                similar::ChangeTag::Equal => ' ',
                similar::ChangeTag::Insert => '+',
                similar::ChangeTag::Delete => '-',
            };
            out.push(sign);
            out.push_str(change.as_str().unwrap_or("").trim_end_matches('\n'));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compute_groups_changes_into_hunks() {
        let d = LineDiff::between("a\nb\nc\nd", "a\nB\nc\nd\ne");
        assert_eq!(d.hunks.len(), 2);
        assert_eq!(
            d.hunks[0].lines,
            vec![
                DiffLine { side: Side::Deleted, index: 1, text: "b".into() },
                DiffLine { side: Side::Added, index: 1, text: "B".into() },
            ]
        );
        assert_eq!(d.hunks[1].lines, vec![DiffLine { side: Side::Added, index: 4, text: "e".into() }]);
        assert!(LineDiff::between("x\ny", "x\ny").is_empty());
    }

    #[test]
    fn parses_git_diff() {
        let text = "diff --git a/src/x.c b/src/x.c\nindex 1..2 100644\n--- a/src/x.c\n+++ b/src/x.c\n\
                    @@ -1,3 +1,4 @@ int f(void)\n a\n-b\n+B\n+C\n c\n\
                    diff --git a/new.h b/new.h\nnew file mode 100644\n--- /dev/null\n+++ b/new.h\n@@ -0,0 +1 @@\n+int y;\n";
        let files = parse_unified(text).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].path(), "src/x.c");
        assert_eq!(files[0].hunks[0].section, "int f(void)");
        assert_eq!(
            files[0].changed_lines().collect::<Vec<_>>(),
            vec![(LineKind::Removed, "b"), (LineKind::Added, "B"), (LineKind::Added, "C")]
        );
        assert_eq!(files[1].old_path, None);
        assert_eq!(files[1].path(), "new.h");
    }

    #[test]
    fn rejects_truncated_hunks() {
        let text = "--- a/x\n+++ b/x\n@@ -1,3 +1,3 @@\n a\n";
        assert!(matches!(parse_unified(text), Err(DiffParseError::HunkLengthMismatch(_))));
        assert!(matches!(parse_unified("@@ -1 +1 @@\n"), Err(DiffParseError::HunkWithoutFile(1))));
        assert!(matches!(parse_unified("--- a/x\n+++ b/x\n@@ -x +1 @@\n"), Err(DiffParseError::BadHunkHeader(3))));
    }

    #[test]
    fn render_then_parse() {
        let old = "int a;\nint b;\nint c;\n";
        let new = "int a;\nint B;\nint c;\nint d;\n";
        let text = render_unified("f.c", Some(old), Some(new));
        let files = parse_unified(&text).unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(
            files[0].changed_lines().collect::<Vec<_>>(),
            vec![(LineKind::Removed, "int b;"), (LineKind::Added, "int B;"), (LineKind::Added, "int d;")]
        );
        assert_eq!(render_unified("f.c", Some(old), Some(old)), "");
        let created = parse_unified(&render_unified("g.c", None, Some("x\n"))).unwrap();
        assert_eq!(created[0].old_path, None);
    }
}
