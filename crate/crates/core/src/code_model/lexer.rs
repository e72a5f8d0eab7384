//! A small C/C++ tokenizer. It understands enough of the lexical grammar to
//! find comments, literals and preprocessor lines reliably; it does not
//! attempt to recognize keywords or types.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    /// String literal, including any encoding prefix.
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
    /// 1-based line of the first and last byte.
    pub line: usize,
    pub end_line: usize,
    /// Index of the preprocessor directive this token belongs to, if any.
    pub directive: Option<usize>,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

const PUNCT3: [&str; 4] = [">>=", "<<=", "...", "->*"];
const PUNCT2: [&str; 24] = [
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "::", "##", ".*", "<:", ":>",
];

const STRING_PREFIXES: [&str; 10] = ["L", "u", "U", "u8", "R", "LR", "uR", "UR", "u8R", ""];

/// Span of the gap material (whitespace or a comment) starting at `pos`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gap {
    Whitespace(usize),
    Comment(usize),
}

pub(crate) fn gap_at(bytes: &[u8], pos: usize) -> Option<Gap> {
    match bytes[pos] {
        b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => Some(Gap::Whitespace(pos + 1)),
        b'\\' if bytes.get(pos + 1) == Some(&b'\n') => Some(Gap::Whitespace(pos + 2)),
        b'\\' if bytes.get(pos + 1) == Some(&b'\r') && bytes.get(pos + 2) == Some(&b'\n') => {
            Some(Gap::Whitespace(pos + 3))
        }
        b'/' if bytes.get(pos + 1) == Some(&b'/') => {
            let mut end = pos + 2;
            while end < bytes.len() && bytes[end] != b'\n' {
                end += 1;
            }
            Some(Gap::Comment(end))
        }
        b'/' if bytes.get(pos + 1) == Some(&b'*') => {
            let mut end = pos + 2;
            while end < bytes.len() && !(bytes[end] == b'*' && bytes.get(end + 1) == Some(&b'/')) {
                end += 1;
            }
            Some(Gap::Comment((end + 2).min(bytes.len())))
        }
        _ => None,
    }
}

/// End of a quoted literal starting at `pos` (which holds the quote).
/// Unterminated literals stop at the end of the line.
fn quoted_end(bytes: &[u8], pos: usize, quote: u8) -> usize {
    let mut i = pos + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// End of a raw string literal `R"delim( ... )delim"` whose quote is at `pos`.
fn raw_string_end(src: &str, pos: usize) -> Option<usize> {
    let rest = &src[pos + 1..];
    let open = rest.find('(')?;
    let delim = &rest[..open];
    if delim.len() > 16 || delim.contains(|c: char| c.is_whitespace() || c == '\\' || c == ')') {
        return None;
    }
    let close = format!("){delim}\"");
    let body_start = pos + 1 + open + 1;
    src[body_start..]
        .find(&close)
        .map(|off| body_start + off + close.len())
}

/// If a string literal (with optional prefix) starts at `pos`, returns its
/// end offset and the length of the prefix.
pub(crate) fn string_literal_at(src: &str, pos: usize) -> Option<(usize, usize)> {
    let bytes = src.as_bytes();
    for prefix in STRING_PREFIXES {
        let quote = pos + prefix.len();
        if quote >= bytes.len() || bytes[quote] != b'"' || !src[pos..].starts_with(prefix) {
            continue;
        }
        if prefix.ends_with('R') {
            if let Some(end) = raw_string_end(src, quote) {
                return Some((end, prefix.len()));
            }
            continue;
        }
        return Some((quoted_end(bytes, quote, b'"'), prefix.len()));
    }
    None
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c == b'$'
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

fn number_end(bytes: &[u8], pos: usize) -> usize {
    let hex = bytes[pos] == b'0' && matches!(bytes.get(pos + 1), Some(b'x' | b'X'));
    let mut i = pos + 1;
    while i < bytes.len() {
        let c = bytes[i];
        let prev = bytes[i - 1];
        if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'\'' {
            i += 1;
        } else if (c == b'+' || c == b'-')
            && (matches!(prev, b'p' | b'P') || (!hex && matches!(prev, b'e' | b'E')))
        {
            i += 1;
        } else {
            break;
        }
    }
    i
}

fn char_len_at(src: &str, pos: usize) -> usize {
    src[pos..].chars().next().map_or(1, char::len_utf8)
}

/// Tokenize `src`. Comments and whitespace are dropped. Never fails: bytes
/// that fit no token class become single-character punctuation.
pub fn tokenize(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    let mut at_line_start = true;
    let mut directive: Option<usize> = None;
    let mut directive_count = 0;

    let count_lines = |from: usize, to: usize| bytes[from..to].iter().filter(|&&b| b == b'\n').count();

    while pos < bytes.len() {
        if let Some(gap) = gap_at(bytes, pos) {
            let end = match gap {
                Gap::Whitespace(e) | Gap::Comment(e) => e,
            };
            if bytes[pos] == b'\n' {
                at_line_start = true;
                directive = None;
            }
            line += count_lines(pos, end);
            pos = end;
            continue;
        }

        let start = pos;
        let start_line = line;
        let c = bytes[pos];
        let kind;
        if c == b'#' && at_line_start {
            directive = Some(directive_count);
            directive_count += 1;
            kind = TokenKind::Punct;
            pos += 1;
        } else if let Some((end, _)) = string_literal_at(src, pos) {
            kind = TokenKind::Str;
            pos = end;
        } else if is_ident_start(c) {
            while pos < bytes.len() && is_ident_continue(bytes[pos]) {
                pos += 1;
            }
            kind = TokenKind::Ident;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit)) {
            pos = number_end(bytes, pos);
            kind = TokenKind::Number;
        } else if c == b'\'' {
            pos = quoted_end(bytes, pos, b'\'');
            kind = TokenKind::Char;
        } else {
            let rest = &src[pos..];
            let len = PUNCT3
                .iter()
                .chain(PUNCT2.iter())
                .find(|p| rest.starts_with(**p))
                .map_or_else(|| char_len_at(src, pos), |p| p.len());
            pos += len;
            kind = TokenKind::Punct;
        }
        line += count_lines(start, pos);
        at_line_start = false;
        tokens.push(Token {
            kind,
            start,
            end: pos,
            line: start_line,
            end_line: line,
            directive,
        });
    }
    tokens
}
