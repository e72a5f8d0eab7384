//! Labelled (vulnerable, patched, target) triples covering exact reuse,
//! custom reuse with and without the fix, and global declarations.

/// A security fix: the vulnerable file and the replacements that patch it.
#[derive(Debug, Clone, Copy)]
pub struct Fix {
    pub id: &'static str,
    pub vulnerable: &'static str,
    pub edits: &'static [(&'static str, &'static str)],
    /// A local the vendor renamed.
    pub local: (&'static str, &'static str),
}

impl Fix {
    pub fn patched(&self) -> String {
        let mut out = self.vulnerable.to_string();
        for (from, to) in self.edits {
            assert!(out.contains(from), "{}: edit anchor missing", self.id);
            out = out.replacen(from, to, 1);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    ExactVulnerable,
    ExactPatched,
    CustomUnpatched,
    CustomUnpatchedRename,
    CustomPatchedReformat,
    CustomPatchedShift,
    CustomPatchedRename,
    DeclVulnerable,
    DeclPatched,
}

impl Kind {
    pub fn is_exact(self) -> bool {
        matches!(self, Kind::ExactVulnerable | Kind::ExactPatched)
    }
}

#[derive(Debug, Clone)]
pub struct Triple {
    pub name: String,
    pub kind: Kind,
    pub vulnerable: String,
    pub patched: String,
    pub target: String,
    /// Hand label: the target still carries the vulnerability.
    pub vulnerable_label: bool,
}

pub const FUNCTION_FIXES: [Fix; 8] = [
    Fix {
        id: "png-chunk-length",
        vulnerable: include_str!("../bench/png_chunk.c"),
        edits: &[("    memcpy(out, r->cursor, len);\n", "    if (len > cap || len > r->remaining)\n        return PNG_ERR_CHUNK;\n    memcpy(out, r->cursor, len);\n")],
        local: ("computed", "crc_calc"),
    },
    Fix {
        id: "http-header-null",
        vulnerable: include_str!("../bench/http_header.c"),
        edits: &[("    name_len = (size_t)(colon - line);\n", "    if (colon == NULL)\n        return HTTP_ERR_MALFORMED;\n    name_len = (size_t)(colon - line);\n")],
        local: ("value_len", "vlen"),
    },
    Fix {
        id: "alloc-overflow",
        vulnerable: include_str!("../bench/table_alloc.c"),
        edits: &[("    total = rows * cols * elem;\n", "    if (cols != 0 && rows > SIZE_MAX / cols)\n        return NULL;\n    total = rows * cols * elem;\n")],
        local: ("padded", "rounded"),
    },
    Fix {
        id: "ring-off-by-one",
        vulnerable: include_str!("../bench/ring_push.c"),
        edits: &[("if (next > rb->capacity)", "if (next >= rb->capacity)")],
        local: ("used", "fill"),
    },
    Fix {
        id: "session-use-after-free",
        vulnerable: include_str!("../bench/session_close.c"),
        edits: &[
            ("    struct session **pp;\n", "    struct session **pp;\n    unsigned id = s->id;\n"),
            ("log_event(srv->log, EV_CLOSE, s->id);", "log_event(srv->log, EV_CLOSE, id);"),
        ],
        local: ("reason", "why"),
    },
    Fix {
        id: "tlv-infinite-loop",
        vulnerable: include_str!("../bench/parse_tlv.c"),
        edits: &[("        off += item_len;\n", "        off += 2 + item_len;\n")],
        local: ("depth", "nest"),
    },
    Fix {
        id: "log-format-string",
        vulnerable: include_str!("../bench/audit_record.c"),
        edits: &[("syslog(LOG_NOTICE, line);", "syslog(LOG_NOTICE, \"%s\", line);")],
        local: ("stamp", "tbuf"),
    },
    Fix {
        id: "path-traversal",
        vulnerable: include_str!("../bench/extract_entry.c"),
        edits: &[("    if (snprintf(path,", "    if (e->name[0] == '/' || strstr(e->name, \"..\") != NULL)\n        return AR_EUNSAFE;\n    if (snprintf(path,")],
        local: ("rc", "status"),
    },
];

pub const DECL_FIXES: [Fix; 4] = [
    Fix { id: "max-header", vulnerable: "#define MAX_HEADER_LEN 8192\n", edits: &[("8192", "1024")], local: ("", "") },
    Fix { id: "key-table", vulnerable: "static unsigned char key_table[16];\n", edits: &[("16", "32")], local: ("", "") },
    Fix {
        id: "default-cipher",
        vulnerable: "static const char *default_cipher = \"RC4-MD5\";\nstatic int allow_renegotiation = 1;\n",
        edits: &[("renegotiation = 1", "renegotiation = 0")],
        local: ("", ""),
    },
    Fix { id: "depth-limit", vulnerable: "enum { MAX_NESTING = 100000 };\n", edits: &[("100000", "256")], local: ("", "") },
];

/// Lines of `patched` that `vulnerable` lacks.
fn patch_lines(fix: &Fix) -> Vec<String> {
    let old: Vec<&str> = fix.vulnerable.lines().collect();
    fix.patched().lines().filter(|l| !old.contains(l)).map(str::to_string).collect()
}

/// Drop the spaces around operators and after keywords.
pub fn squeeze(line: &str) -> String {
    let indent = line.len() - line.trim_start().len();
    let mut body = line.trim_start().to_string();
    for (from, to) in [(" = ", "="), (" == ", "=="), (" != ", "!="), (" > ", ">"), (" >= ", ">="), (" < ", "<"), (" + ", "+"), (" / ", "/"), (" || ", "||"), (" && ", "&&"), ("if (", "if("), (", ", ",")] {
        body = body.replace(from, to);
    }
    format!("{}{}", &line[..indent], body)
}

/// The function with `extra` inserted after its first line matching
/// `anchor`.
fn insert_after(src: &str, anchor: &str, extra: &str) -> String {
    let mut out = String::new();
    let mut done = false;
    for line in src.lines() {
        out.push_str(line);
        out.push('\n');
        if !done && line.contains(anchor) {
            out.push_str(extra);
            out.push('\n');
            done = true;
        }
    }
    out
}

/// Replace whole-word occurrences of `from`.
pub fn rename(src: &str, from: &str, to: &str) -> String {
    let word = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let mut out = String::new();
    let mut rest = src;
    while let Some(i) = rest.find(from) {
        let before = rest[..i].chars().next_back();
        let after = rest[i + from.len()..].chars().next();
        out.push_str(&rest[..i]);
        if before.is_some_and(word) || after.is_some_and(word) {
            out.push_str(from);
        } else {
            out.push_str(to);
        }
        rest = &rest[i + from.len()..];
    }
    out.push_str(rest);
    out
}

fn map_lines(src: &str, f: impl Fn(&str) -> String) -> String {
    src.lines().map(|l| f(l) + "\n").collect()
}

/// The vendor's usual edits: a comment, a tracing call after the opening
/// brace, and a blank line.
fn vendor_touch(src: &str) -> String {
    let traced = insert_after(src, "{", "    /* vendor: keep in sync with upstream */\n    TRACE_ENTER();");
    insert_after(&traced, ";", "")
}

pub fn function_triples() -> Vec<Triple> {
    let mut out = Vec::new();
    for fix in FUNCTION_FIXES {
        let added = patch_lines(&fix);
        let (v, p) = (fix.vulnerable.to_string(), fix.patched());
        let reformatted = map_lines(&p, |l| if added.iter().any(|a| a == l) { squeeze(l) } else { l.to_string() });
        let shifted = insert_after(&vendor_touch(&p), "{", "    stats_bump(STATS_CALLS);");
        let variants = [
            (Kind::ExactVulnerable, v.clone(), true),
            (Kind::ExactPatched, p.clone(), false),
            (Kind::CustomUnpatched, vendor_touch(fix.vulnerable), true),
            (Kind::CustomUnpatchedRename, rename(fix.vulnerable, fix.local.0, fix.local.1), true),
            (Kind::CustomPatchedReformat, vendor_touch(&reformatted), false),
            (Kind::CustomPatchedShift, shifted, false),
            (Kind::CustomPatchedRename, rename(&p, fix.local.0, fix.local.1), false),
        ];
        for (kind, target, label) in variants {
            out.push(Triple {
                name: format!("{}/{kind:?}", fix.id),
                kind,
                vulnerable: v.clone(),
                patched: p.clone(),
                target,
                vulnerable_label: label,
            });
        }
    }
    out
}

pub fn decl_triples() -> Vec<Triple> {
    let mut out = Vec::new();
    for fix in DECL_FIXES {
        let neighbours = "static int verbose_level = 1;\n";
        for (kind, target, label) in [
            (Kind::DeclVulnerable, format!("{neighbours}{}", fix.vulnerable), true),
            (Kind::DeclPatched, format!("{neighbours}{}", fix.patched()), false),
        ] {
            out.push(Triple {
                name: format!("{}/{kind:?}", fix.id),
                kind,
                vulnerable: fix.vulnerable.to_string(),
                patched: fix.patched(),
                target,
                vulnerable_label: label,
            });
        }
    }
    out
}

pub fn all_triples() -> Vec<Triple> {
    let mut t = function_triples();
    t.extend(decl_triples());
    t
}

/// What the pipeline says about one triple.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub name: String,
    pub kind: Kind,
    pub label: bool,
    pub predicted: bool,
    pub verdicts: Vec<vulture::flaw_detect::Verdict>,
}

pub fn predict(t: &Triple, th_hash: u32) -> Prediction {
    use vulture::flaw_detect::{classify_reuse, version_diff_files, Verdict};
    let scope = version_diff_files("lib/file.c", Some(&t.vulnerable), Some(&t.patched));
    let targets = vulture::reuse_id::snippets_of(&t.target, "vendor/file.c");
    let all: Vec<usize> = (0..targets.len()).collect();
    let verdicts: Vec<Verdict> = classify_reuse(&targets, &all, &scope, th_hash).into_iter().map(|c| c.verdict).collect();
    Prediction {
        name: t.name.clone(),
        kind: t.kind,
        label: t.vulnerable_label,
        predicted: verdicts.contains(&Verdict::Vulnerable),
        verdicts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Score {
    pub fn of(predictions: &[Prediction]) -> Score {
        let mut s = Score { tp: 0, fp: 0, fn_: 0, tn: 0 };
        for p in predictions {
            match (p.label, p.predicted) {
                (true, true) => s.tp += 1,
                (false, true) => s.fp += 1,
                (true, false) => s.fn_ += 1,
                (false, false) => s.tn += 1,
            }
        }
        s
    }

    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 { 1.0 } else { 2.0 * self.tp as f64 / denom as f64 }
    }
}
