//! Function pairs for digest robustness: cosmetic edits that normalization
//! must erase, and single-identifier renames.

use crate::benchmark::FUNCTION_FIXES;

/// Twenty distinct C functions.
pub fn base_functions() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for fix in FUNCTION_FIXES {
        out.push((format!("{}-vulnerable", fix.id), fix.vulnerable.to_string()));
        out.push((format!("{}-patched", fix.id), fix.patched()));
    }
    out.push(("rdtarga-vulnerable".into(), include_str!("../../core/tests/fixtures/fig4/vulnerable.c").into()));
    out.push(("rdtarga-patched".into(), include_str!("../../core/tests/fixtures/fig4/patched.c").into()));
    out.push(("r3-dissector".into(), crate::wireshark::r3_source(crate::wireshark::R3Fix::None)));
    out.push(("inflate-reset".into(), crate::dependency::INFLATE_RESET.into()));
    out
}

/// Re-indent with tabs, pad line ends, add comments and blank lines, and
/// rewrite every string literal.
pub fn cosmetic(src: &str) -> String {
    let mut out = String::from("/* vendored copy */\n");
    for (i, line) in src.lines().enumerate() {
        let indent = line.len() - line.trim_start().len();
        let mut body = rewrite_strings(line.trim_start());
        if i % 3 == 1 && body.ends_with(';') {
            body.push_str(" /* reviewed */");
        }
        out.push_str(&"\t".repeat(indent / 4));
        out.push_str(&" ".repeat(indent % 4));
        out.push_str(&body);
        out.push_str("   \n");
        if i % 5 == 4 {
            out.push_str("\n// local note\n");
        }
    }
    out
}

fn rewrite_strings(line: &str) -> String {
    let mut out = String::new();
    let mut in_str = false;
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match (in_str, c) {
            (false, '"') => {
                in_str = true;
                out.push_str("\"vendor:");
            }
            (true, '\\') => {
                chars.next();
            }
            (true, '"') => {
                in_str = false;
                out.push('"');
            }
            (true, _) => {}
            (false, _) => out.push(c),
        }
    }
    out
}

/// The first parameter name of the first function in `src`.
pub fn first_parameter(src: &str) -> Option<String> {
    let name = function_name(src)?;
    let at = src.find(&name)? + name.len();
    let open = at + src[at..].find('(')?;
    let close = open + src[open..].find(')')?;
    let first = src[open + 1..close].split(',').next()?;
    let name: String = first
        .trim()
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (!name.is_empty() && name != "void").then_some(name)
}

/// `src` with its first parameter renamed everywhere.
pub fn rename_first_parameter(src: &str) -> Option<(String, String)> {
    let old = first_parameter(src)?;
    let new = format!("{old}_arg");
    Some((old.clone(), crate::benchmark::rename(src, &old, &new)))
}

/// The name of the first function in `src`.
pub fn function_name(src: &str) -> Option<String> {
    vulture::code_model::extract_snippets(src, "f.c")
        .snippets
        .into_iter()
        .find(|s| s.kind == vulture::code_model::SnippetKind::Function)
        .map(|s| s.name)
}

/// `src` with its function renamed.
pub fn rename_function(src: &str) -> Option<(String, String)> {
    let old = function_name(src)?;
    let new = format!("vendor_{old}");
    Some((old.clone(), crate::benchmark::rename(src, &old, &new)))
}
