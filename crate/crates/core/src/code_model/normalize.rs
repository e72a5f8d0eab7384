use super::lexer::{gap_at, string_literal_at, Gap};
use super::SourceSnippet;

/// Replacement for every string literal body.
pub const STRING_PLACEHOLDER: &str = "\"S\"";

/// Normalize C/C++ text: drop comments, replace string literals with
/// [`STRING_PLACEHOLDER`], trim every line and drop blank lines.
///
/// A removed comment collapses into at most one space so that
/// `a /* x */ + b` and `a + b` normalize identically.
pub fn normalize_text(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    let mut skip_blanks = false;

    while pos < bytes.len() {
        let c = bytes[pos];
        if skip_blanks && (c == b' ' || c == b'\t') {
            pos += 1;
            continue;
        }
        skip_blanks = false;

        if let Some(Gap::Comment(end)) = gap_at(bytes, pos) {
            if !out.ends_with(|ch: char| ch.is_whitespace()) && !out.is_empty() {
                out.push(' ');
            }
            skip_blanks = true;
            pos = end;
            continue;
        }

        // Identifiers are copied whole so that a trailing `L`/`R` inside a
        // longer name is never mistaken for a string prefix.
        if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
            if let Some((end, prefix_len)) = string_literal_at(text, pos) {
                let prefix = text[pos..pos + prefix_len].trim_end_matches('R');
                out.push_str(prefix);
                out.push_str(STRING_PLACEHOLDER);
                pos = end;
                continue;
            }
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_' || bytes[pos] == b'$') {
                pos += 1;
            }
            out.push_str(&text[start..pos]);
            continue;
        }

        if c == b'"' {
            let (end, _) = string_literal_at(text, pos).unwrap_or((pos + 1, 0));
            out.push_str(STRING_PLACEHOLDER);
            pos = end;
            continue;
        }

        if c == b'\'' {
            let start = pos;
            pos += 1;
            while pos < bytes.len() {
                match bytes[pos] {
                    b'\\' => pos += 2,
                    b'\n' => break,
                    b'\'' => {
                        pos += 1;
                        break;
                    }
                    _ => pos += 1,
                }
            }
            let end = pos.min(bytes.len());
            out.push_str(&text[start..end]);
            pos = end;
            continue;
        }

        let len = text[pos..].chars().next().map_or(1, char::len_utf8);
        out.push_str(&text[pos..pos + len]);
        pos += len;
    }

    let mut result = String::with_capacity(out.len());
    for line in out.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if !result.is_empty() {
            result.push('\n');
        }
        result.push_str(line);
    }
    result
}

/// Populate `normalized_body` from `body`.
pub fn normalize(mut snippet: SourceSnippet) -> SourceSnippet {
    snippet.normalized_body = normalize_text(&snippet.body);
    snippet
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_comment_and_indent() {
        assert_eq!(normalize_text("  x = 1; // inc"), "x = 1;");
    }

    #[test]
    fn replaces_string_literals() {
        assert_eq!(normalize_text(r#"printf("hello %d", x);"#), r#"printf("S", x);"#);
        assert_eq!(normalize_text(r#"w = L"wide";"#), r#"w = L"S";"#);
        assert_eq!(normalize_text(r#"r = R"x(a"b)x";"#), r#"r = "S";"#);
    }

    #[test]
    fn keeps_char_literals() {
        assert_eq!(normalize_text(r"c = '\'';"), r"c = '\'';");
    }

    #[test]
    fn inline_block_comment_collapses() {
        assert_eq!(normalize_text("a /* c */ + b"), "a + b");
        assert_eq!(normalize_text("a/**/b"), "a b");
    }

    #[test]
    fn drops_blank_lines_and_multiline_comments() {
        let src = "int f(void)\n{\n\n    /* multi\n       line */\n    return 0;   \n}\n";
        assert_eq!(normalize_text(src), "int f(void)\n{\nreturn 0;\n}");
    }

    #[test]
    fn identifier_ending_in_prefix_letter() {
        assert_eq!(normalize_text(r#"VAL"x""#), r#"VAL"S""#);
        assert_eq!(normalize_text("fooR = 1;"), "fooR = 1;");
    }

    #[test]
    fn comment_markers_inside_strings_are_literal() {
        assert_eq!(normalize_text(r#"s = "// not a comment"; t = 1;"#), r#"s = "S"; t = 1;"#);
    }
}
