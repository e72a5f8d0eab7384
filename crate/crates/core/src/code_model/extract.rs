//! Top-level boundary extraction for C/C++ files: function definitions and
//! the declarations between them.

use super::lexer::{tokenize, Token, TokenKind};
use super::normalize::normalize_text;
use super::{CodeModelError, SnippetKind, SourceSnippet};

/// Result of extracting one file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub snippets: Vec<SourceSnippet>,
    pub warnings: Vec<CodeModelError>,
}

const TRAILING_QUALIFIERS: [&str; 5] = ["const", "noexcept", "override", "final", "volatile"];
const NOT_A_NAME: [&str; 6] = ["__attribute__", "__declspec", "throw", "noexcept", "alignas", "decltype"];
const KEYWORDS: [&str; 12] = [
    "if", "while", "for", "switch", "return", "sizeof", "do", "else", "case", "goto", "typedef", "defined",
];
const TAGS: [&str; 4] = ["struct", "union", "enum", "class"];

struct Ctx<'a> {
    src: &'a str,
    toks: Vec<Token>,
    path: &'a str,
}

impl Ctx<'_> {
    fn text(&self, i: usize) -> &str {
        self.toks[i].text(self.src)
    }

    fn snippet(&self, kind: SnippetKind, name: String, first: usize, last: usize) -> SourceSnippet {
        let (a, b) = (&self.toks[first], &self.toks[last]);
        let body = self.src[a.start..b.end].to_string();
        SourceSnippet {
            kind,
            normalized_body: normalize_text(&body),
            name,
            body,
            file_path: self.path.to_string(),
            line_span: (a.line, b.end_line),
        }
    }

    /// Index of the brace closing the one at `open`, skipping directives.
    fn matching_brace(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in open..self.toks.len() {
            if self.toks[i].directive.is_some() {
                continue;
            }
            match self.text(i) {
                "{" => depth += 1,
                "}" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Top-level parenthesis groups `(open, close)` among `range`.
    fn paren_groups(&self, range: &[usize]) -> Vec<(usize, usize)> {
        let mut groups = Vec::new();
        let mut depth = 0usize;
        let mut open = 0;
        for (pos, &i) in range.iter().enumerate() {
            match self.text(i) {
                "(" => {
                    if depth == 0 {
                        open = pos;
                    }
                    depth += 1;
                }
                ")" if depth > 0 => {
                    depth -= 1;
                    if depth == 0 {
                        groups.push((open, pos));
                    }
                }
                _ => {}
            }
        }
        groups
    }

    fn has_top_level(&self, range: &[usize], what: &str) -> bool {
        let mut depth = 0i32;
        for &i in range {
            match self.text(i) {
                "(" | "[" => depth += 1,
                ")" | "]" => depth -= 1,
                t if depth == 0 && t == what => return true,
                _ => {}
            }
        }
        false
    }

    /// The name before the paren group at `range[open]`, if it is a callable
    /// name (`f`, `ns::f`, `~T`, `operator==`).
    fn callable_name(&self, range: &[usize], open: usize) -> Option<String> {
        if open == 0 {
            return None;
        }
        let mut k = open - 1;
        let tok = &self.toks[range[k]];
        if tok.kind != TokenKind::Ident {
            // operator overloads
            let mut j = k;
            while j > 0 && self.toks[range[j]].kind == TokenKind::Punct {
                j -= 1;
            }
            if self.text(range[j]) == "operator" {
                let op: String = (j + 1..=k).map(|x| self.text(range[x])).collect();
                return Some(format!("operator{op}"));
            }
            return None;
        }
        let word = self.text(range[k]);
        if KEYWORDS.contains(&word) || NOT_A_NAME.contains(&word) {
            return None;
        }
        let mut name = word.to_string();
        while k >= 2 && self.text(range[k - 1]) == "::" {
            let prev = range[k - 2];
            if self.toks[prev].kind != TokenKind::Ident {
                break;
            }
            name = format!("{}::{name}", self.text(prev));
            k -= 2;
        }
        if k >= 1 && self.text(range[k - 1]) == "~" {
            name = format!("~{name}");
        }
        Some(name)
    }

    /// If the pending tokens form a function header, returns the function name.
    fn function_name(&self, pending: &[usize]) -> Option<String> {
        if pending.is_empty() || self.has_top_level(pending, "=") {
            return None;
        }
        let groups = self.paren_groups(pending);
        let last = *pending.last()?;
        let last_text = self.text(last);
        let header_end = if last_text == ")" || TRAILING_QUALIFIERS.contains(&last_text) {
            true
        } else {
            // C++ constructor initializer lists: `A::A() : x(1), y(2) {`
            groups.iter().any(|&(_, close)| {
                close + 1 < pending.len() && self.text(pending[close + 1]) == ":"
            })
        };
        if !header_end {
            return None;
        }
        // Pick the last top-level group preceded by a real name, but stop at a
        // constructor initializer list.
        let init_list = (0..pending.len()).find(|&p| {
            self.text(pending[p]) == ":" && p > 0 && self.text(pending[p - 1]) == ")"
        });
        groups
            .iter()
            .rev()
            .filter(|&&(open, _)| init_list.is_none_or(|il| open < il))
            .find_map(|&(open, _)| self.callable_name(pending, open))
    }

    fn declaration_name(&self, pending: &[usize]) -> String {
        let words = |r: &[usize]| -> Vec<String> {
            r.iter()
                .filter(|&&i| self.toks[i].kind == TokenKind::Ident)
                .map(|&i| self.text(i).to_string())
                .collect()
        };
        let first = self.text(pending[0]);

        // Function pointer declarators: `void (*cb)(int)`.
        for w in pending.windows(3) {
            if self.text(w[0]) == "(" && self.text(w[1]) == "*" && self.toks[w[2]].kind == TokenKind::Ident {
                return self.text(w[2]).to_string();
            }
        }

        let mut depth = 0i32;
        let mut cut = pending.len();
        let mut brace_start = None;
        for (p, &i) in pending.iter().enumerate() {
            match self.text(i) {
                "(" | "[" => {
                    if depth == 0 && self.text(i) == "[" && cut == pending.len() {
                        cut = p;
                    }
                    depth += 1;
                }
                ")" | "]" => depth -= 1,
                "{" => {
                    brace_start.get_or_insert(p);
                    depth += 1;
                }
                "}" => depth -= 1,
                "=" | "," | ";" if depth == 0 && cut == pending.len() => cut = p,
                _ => {}
            }
        }

        if first == "typedef" {
            if let Some(name) = words(pending).last() {
                return name.clone();
            }
        }
        if let Some(b) = brace_start {
            // `struct tag { ... } var;` or `struct tag { ... };`
            let closing = pending.iter().rposition(|&i| self.text(i) == "}").unwrap_or(b);
            let declarators = words(&pending[closing..]);
            if let Some(d) = declarators.first() {
                return d.clone();
            }
            let head = words(&pending[..b]);
            if let Some(tag) = head.iter().rev().find(|w| !TAGS.contains(&w.as_str())) {
                return tag.clone();
            }
        }

        let groups = self.paren_groups(&pending[..cut]);
        if let Some(&(open, _)) = groups.first() {
            if let Some(n) = self.callable_name(pending, open) {
                return n;
            }
        }
        words(&pending[..cut])
            .last()
            .cloned()
            .or_else(|| words(pending).first().cloned())
            .unwrap_or_else(|| "<anonymous>".to_string())
    }

    fn directive_snippet(&self, toks: &[usize]) -> Option<SourceSnippet> {
        let word = toks.get(1).map(|&i| self.text(i))?;
        let name = match word {
            "define" | "undef" => toks.get(2).map(|&i| self.text(i).to_string())?,
            "include" | "import" => {
                let first = self.toks[*toks.get(2)?].start;
                let last = self.toks[*toks.last()?].end;
                self.src[first..last]
                    .trim_matches(|c| matches!(c, '<' | '>' | '"'))
                    .to_string()
            }
            _ => return None,
        };
        Some(self.snippet(SnippetKind::GlobalDecl, name, toks[0], *toks.last()?))
    }
}

/// Extract every top-level function definition and declaration from
/// `source_text`. Parsing never fails; unclosed function bodies are reported
/// as warnings and end the scan of the file.
pub fn extract_snippets(source_text: &str, file_path: &str) -> Extraction {
    let ctx = Ctx {
        src: source_text,
        toks: tokenize(source_text),
        path: file_path,
    };
    let mut out = Extraction::default();
    let mut pending: Vec<usize> = Vec::new();
    let mut paren_depth = 0usize;
    // Count of open `extern "C" {` / `namespace x {` scopes.
    let mut transparent = 0usize;
    let n = ctx.toks.len();
    let mut i = 0;

    while i < n {
        if let Some(d) = ctx.toks[i].directive {
            let start = i;
            while i < n && ctx.toks[i].directive == Some(d) {
                i += 1;
            }
            let group: Vec<usize> = (start..i).collect();
            if let Some(s) = ctx.directive_snippet(&group) {
                out.snippets.push(s);
            }
            continue;
        }

        let text = ctx.text(i);
        match text {
            "(" | "[" => paren_depth += 1,
            ")" | "]" => paren_depth = paren_depth.saturating_sub(1),
            _ => {}
        }

        if paren_depth == 0 && text == ";" {
            pending.push(i);
            let name = ctx.declaration_name(&pending);
            out.snippets.push(ctx.snippet(SnippetKind::GlobalDecl, name, pending[0], i));
            pending.clear();
            i += 1;
            continue;
        }

        if paren_depth == 0 && text == "}" {
            if pending.is_empty() && transparent > 0 {
                transparent -= 1;
            }
            // A stray closing brace resets whatever was accumulating.
            pending.clear();
            i += 1;
            continue;
        }

        if paren_depth == 0 && text == "{" {
            let is_scope = match pending.as_slice() {
                [] => false,
                [a, b] => (ctx.text(*a) == "extern" && ctx.toks[*b].kind == TokenKind::Str)
                    || ctx.text(*a) == "namespace",
                [a, ..] => ctx.text(*a) == "namespace" && pending.len() <= 4,
            };
            if is_scope {
                transparent += 1;
                pending.clear();
                i += 1;
                continue;
            }

            let Some(close) = ctx.matching_brace(i) else {
                out.warnings.push(CodeModelError::UnbalancedBraces {
                    path: file_path.to_string(),
                    line: ctx.toks[i].line,
                });
                return out;
            };

            if let Some(name) = ctx.function_name(&pending) {
                let first = pending[0];
                out.snippets.push(ctx.snippet(SnippetKind::Function, name, first, close));
                pending.clear();
                i = close + 1;
                continue;
            }

            // Aggregate: struct/union/enum body or initializer. Keep
            // accumulating until the terminating semicolon.
            if pending.is_empty() {
                // A bare block at file scope is not valid C; skip it.
                i = close + 1;
                continue;
            }
            pending.extend(i..=close);
            i = close + 1;
            continue;
        }

        pending.push(i);
        i += 1;
    }

    if let Some(&first) = pending.first() {
        let name = ctx.declaration_name(&pending);
        out.snippets.push(ctx.snippet(SnippetKind::GlobalDecl, name, first, *pending.last().unwrap()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(src: &str) -> Vec<(SnippetKind, String, (usize, usize))> {
        extract_snippets(src, "t.c")
            .snippets
            .into_iter()
            .map(|s| (s.kind, s.name, s.line_span))
            .collect()
    }

    #[test]
    fn single_function() {
        assert_eq!(summary("int f(void){return 0;}"), vec![(SnippetKind::Function, "f".into(), (1, 1))]);
    }

    #[test]
    fn define_global_and_function() {
        assert_eq!(
            summary("#define N 4\nint g;\nint h(){return g;}"),
            vec![
                (SnippetKind::GlobalDecl, "N".into(), (1, 1)),
                (SnippetKind::GlobalDecl, "g".into(), (2, 2)),
                (SnippetKind::Function, "h".into(), (3, 3)),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(summary("").is_empty());
        assert!(summary("/* only a comment */\n\n").is_empty());
    }

    #[test]
    fn struct_typedef_array_and_prototype() {
        let src = "struct point {\n  int x;\n  int y;\n};\n\
                   typedef struct { int a; } pair_t;\n\
                   static const char *names[] = {\n  \"a\",\n  \"b\"\n};\n\
                   int add(int a, int b);\n\
                   typedef void (*cb)(int);\n";
        assert_eq!(
            summary(src),
            vec![
                (SnippetKind::GlobalDecl, "point".into(), (1, 4)),
                (SnippetKind::GlobalDecl, "pair_t".into(), (5, 5)),
                (SnippetKind::GlobalDecl, "names".into(), (6, 9)),
                (SnippetKind::GlobalDecl, "add".into(), (10, 10)),
                (SnippetKind::GlobalDecl, "cb".into(), (11, 11)),
            ]
        );
    }

    #[test]
    fn multi_line_function_with_nested_braces_and_comments() {
        let src = "/* header */\nstatic int\nclamp(int v, int lo, int hi)\n{\n  if (v < lo) { return lo; } /* } */\n  \
                   const char *s = \"}\";\n  return v > hi ? hi : v;\n}\n";
        let ex = extract_snippets(src, "c.c");
        assert!(ex.warnings.is_empty());
        assert_eq!(ex.snippets.len(), 1);
        let s = &ex.snippets[0];
        assert_eq!((s.kind, s.name.as_str(), s.line_span), (SnippetKind::Function, "clamp", (2, 8)));
        assert!(s.body.starts_with("static int"));
        assert!(s.body.ends_with('}'));
        assert!(!s.normalized_body.contains("/*"));
    }

    #[test]
    fn unbalanced_body_keeps_earlier_snippets() {
        let ex = extract_snippets("int a;\nint f(void) {\n  if (x) {\n", "u.c");
        assert_eq!(ex.snippets.len(), 1);
        assert_eq!(ex.snippets[0].name, "a");
        assert_eq!(
            ex.warnings,
            vec![CodeModelError::UnbalancedBraces { path: "u.c".into(), line: 2 }]
        );
    }

    #[test]
    fn extern_c_and_cpp_methods() {
        let src = "extern \"C\" {\nint f(int x) { return x; }\n}\n\
                   namespace ns {\nint Foo::bar(int y) const { return y; }\nFoo::Foo() : a(1) { }\n}\n";
        let got = summary(src);
        assert_eq!(
            got.iter().map(|(k, n, _)| (*k, n.as_str())).collect::<Vec<_>>(),
            vec![
                (SnippetKind::Function, "f"),
                (SnippetKind::Function, "Foo::bar"),
                (SnippetKind::Function, "Foo::Foo"),
            ]
        );
    }

    #[test]
    fn includes_are_declarations_and_conditionals_are_skipped() {
        let got = summary("#include <stdio.h>\n#ifdef X\n#include \"local.h\"\n#endif\n");
        assert_eq!(
            got,
            vec![
                (SnippetKind::GlobalDecl, "stdio.h".into(), (1, 1)),
                (SnippetKind::GlobalDecl, "local.h".into(), (3, 3)),
            ]
        );
    }

    #[test]
    fn enum_and_initialized_struct() {
        let got = summary("enum color { RED, GREEN };\nstruct point origin = { 0, 0 };\n");
        assert_eq!(
            got,
            vec![
                (SnippetKind::GlobalDecl, "color".into(), (1, 1)),
                (SnippetKind::GlobalDecl, "origin".into(), (2, 2)),
            ]
        );
    }

    #[test]
    fn attribute_before_name() {
        let got = summary("static void __attribute__((unused)) helper(int x)\n{\n  (void)x;\n}\n");
        assert_eq!(got, vec![(SnippetKind::Function, "helper".into(), (1, 4))]);
    }
}
