//! Statement facts: the variables and operations a normalized source line
//! touches, classified through a fixed catalog of regular expressions.
//!
//! The catalog is a reconstruction. Its 40 entries cover literals, control
//! keywords, call expressions, casts, member access, subscripts, the
//! operator families, declarations, labels and punctuation. Entries are tried
//! in catalog order at each position, so every produced token is attributed
//! to exactly one pattern.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::CodeModelError;

/// Number of entries in [`CATALOG`].
pub const CATALOG_SIZE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Preprocessor,
    Literal,
    Control,
    Call,
    Cast,
    Access,
    Operator,
    Declaration,
    Label,
    Identifier,
    Punctuation,
}

impl Category {
    /// Whether tokens of this category are recorded as operations.
    pub fn is_operation(self) -> bool {
        matches!(
            self,
            Category::Preprocessor
                | Category::Control
                | Category::Call
                | Category::Cast
                | Category::Access
                | Category::Operator
        )
    }
}

pub struct PatternDef {
    pub name: &'static str,
    pub category: Category,
    pub regex: &'static str,
}

const fn p(name: &'static str, category: Category, regex: &'static str) -> PatternDef {
    PatternDef { name, category, regex }
}

const TYPE_WORDS: &str = "void|char|short|int|long|float|double|signed|unsigned|_Bool|bool|_Complex|\
const|volatile|static|extern|register|auto|inline|__inline|__inline__|restrict|__restrict|\
struct|union|enum|class|typedef|size_t|ssize_t|ptrdiff_t|intptr_t|uintptr_t|wchar_t|\
int8_t|int16_t|int32_t|int64_t|uint8_t|uint16_t|uint32_t|uint64_t|off_t|FILE";

pub static CATALOG: [PatternDef; CATALOG_SIZE] = [
    p("preprocessor_directive", Category::Preprocessor, r"^#\s*[A-Za-z_]\w*.*$"),
    p("string_literal", Category::Literal, r#"^(?:u8|[LuU])?"(?:[^"\\]|\\.)*"?"#),
    p("char_literal", Category::Literal, r"^(?:u8|[LuU])?'(?:[^'\\]|\\.)*'?"),
    p(
        "number_literal",
        Category::Literal,
        r"^(?:0[xX][0-9A-Fa-f']*(?:\.[0-9A-Fa-f']*)?(?:[pP][+-]?[0-9]+)?|[0-9][0-9']*\.?[0-9']*(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?)[uUlLfF]*",
    ),
    p("if_statement", Category::Control, r"^if\b"),
    p("else_clause", Category::Control, r"^else\b"),
    p("while_loop", Category::Control, r"^while\b"),
    p("for_loop", Category::Control, r"^for\b"),
    p("switch_statement", Category::Control, r"^switch\b"),
    p("case_label", Category::Control, r"^case\b"),
    p("default_label", Category::Control, r"^default\b"),
    p("do_loop", Category::Control, r"^do\b"),
    p("goto_statement", Category::Control, r"^goto\b"),
    p("return_statement", Category::Control, r"^return\b"),
    p("break_statement", Category::Control, r"^break\b"),
    p("continue_statement", Category::Control, r"^continue\b"),
    p("sizeof_expression", Category::Operator, r"^(?:sizeof|_Alignof|alignof)\b"),
    p(
        "cast_expression",
        Category::Cast,
        r"^\(\s*(?:(?:const|volatile|unsigned|signed|struct|union|enum)\s+)*[A-Za-z_]\w*(?:\s+(?:int|long|char|short|double))*\s*[*\s]*\)",
    ),
    p("member_access", Category::Access, r"^(?:->|\.)"),
    p("scope_resolution", Category::Punctuation, r"^::"),
    p("array_subscript", Category::Access, r"^\["),
    p("ternary_conditional", Category::Operator, r"^\?"),
    p("increment_decrement", Category::Operator, r"^(?:\+\+|--)"),
    p("compound_assignment", Category::Operator, r"^(?:<<=|>>=|\+=|-=|\*=|/=|%=|&=|\|=|\^=)"),
    p("equality_comparison", Category::Operator, r"^(?:==|!=)"),
    p("logical_operator", Category::Operator, r"^(?:&&|\|\|)"),
    p("shift_operator", Category::Operator, r"^(?:<<|>>)"),
    p("relational_comparison", Category::Operator, r"^(?:<=|>=|<|>)"),
    p("assignment", Category::Operator, r"^="),
    p("additive_operator", Category::Operator, r"^[+-]"),
    p("multiplicative_operator", Category::Operator, r"^[*/%]"),
    p("bitwise_operator", Category::Operator, r"^[&|^]"),
    p("unary_not", Category::Operator, r"^[!~]"),
    p("call_expression", Category::Call, r"^[A-Za-z_$][\w$]*\s*\("),
    p("type_keyword", Category::Declaration, r"^(?:void|char|short|int|long|float|double|signed|unsigned|_Bool|bool|_Complex|const|volatile|static|extern|register|auto|inline|__inline|__inline__|restrict|__restrict|struct|union|enum|class|typedef|size_t|ssize_t|ptrdiff_t|intptr_t|uintptr_t|wchar_t|int8_t|int16_t|int32_t|int64_t|uint8_t|uint16_t|uint32_t|uint64_t|off_t|FILE)\b"),
    p("declaration", Category::Declaration, r"^([A-Za-z_]\w*)\s*[*&\s]\s*\**\s*[A-Za-z_]"),
    p("label", Category::Label, r"^[A-Za-z_]\w*\s*:"),
    p("identifier", Category::Identifier, r"^[A-Za-z_$][\w$]*"),
    p("grouping", Category::Punctuation, r"^[(){}]"),
    p("separator", Category::Punctuation, r"^(?:\.\.\.|[;,:\]#\\])"),
];

static COMPILED: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    CATALOG
        .iter()
        .map(|d| Regex::new(d.regex).expect("catalog regex"))
        .collect()
});

static TYPE_WORD_SET: LazyLock<BTreeSet<&'static str>> =
    LazyLock::new(|| TYPE_WORDS.split('|').collect());

/// Identifiers that are never variables.
const RESERVED: [&str; 14] = [
    "NULL", "nullptr", "true", "false", "TRUE", "FALSE", "this", "new", "delete", "throw", "try",
    "catch", "operator", "template",
];

/// One operation token and the catalog entry that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operation {
    pub text: String,
    pub pattern: usize,
}

impl Operation {
    pub fn pattern_name(&self) -> &'static str {
        CATALOG[self.pattern].name
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Identifies a control structure: the index of its header line in the text
/// it was found in.
pub type BlockId = usize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementFacts {
    pub variables: BTreeSet<String>,
    pub operations: Vec<Operation>,
    pub control_depth: usize,
    pub control_block_id: Option<BlockId>,
}

impl StatementFacts {
    pub fn operation_texts(&self) -> Vec<&str> {
        self.operations.iter().map(|o| o.text.as_str()).collect()
    }
}

fn is_type_name(word: &str) -> bool {
    TYPE_WORD_SET.contains(word) || word.ends_with("_t")
}

fn is_cast_type(inner: &str) -> bool {
    let words: Vec<&str> = inner
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .collect();
    if inner.contains('*') || words.len() > 1 {
        return true;
    }
    words.first().is_some_and(|w| {
        is_type_name(w) || (w.chars().next().is_some_and(char::is_uppercase))
    })
}

fn first_char_starts_operand(rest: &str) -> bool {
    let rest = rest.trim_start();
    rest.starts_with(|c: char| c.is_alphanumeric() || matches!(c, '_' | '(' | '\'' | '"' | '*' | '&' | '!' | '~' | '-'))
}

/// Scan one line. Returns the facts plus the number of characters no
/// catalog entry could classify.
pub(crate) fn scan_line(line: &str) -> (StatementFacts, usize) {
    let regexes = &*COMPILED;
    let mut facts = StatementFacts::default();
    let mut unclassified = 0;
    let mut pos = 0;
    // Position-sensitive state.
    let mut statement_start = true;
    let mut after_member = false;
    let mut after_goto = false;
    let mut after_tag = false;
    let mut prev_category: Option<Category> = None;
    let mut prev_text = String::new();
    let mut types: BTreeSet<String> = BTreeSet::new();

    while pos < line.len() {
        let rest = &line[pos..];
        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            break;
        }
        pos += rest.len() - trimmed.len();
        let rest = trimmed;

        let mut matched = None;
        for (idx, re) in regexes.iter().enumerate() {
            let def = &CATALOG[idx];
            let Some(m) = re.find(rest) else { continue };
            let text = m.as_str();
            let ok = match def.name {
                "preprocessor_directive" => pos == 0,
                "cast_expression" => {
                    let inner = &text[1..text.len() - 1];
                    let prev_allows = !matches!(prev_category, Some(Category::Identifier | Category::Call | Category::Literal))
                        && !(prev_category == Some(Category::Control) && prev_text != "return" && prev_text != "case")
                        && prev_text != ")"
                        && prev_text != "]";
                    prev_allows && is_cast_type(inner) && first_char_starts_operand(&rest[text.len()..])
                }
                "declaration" => statement_start && !after_member && !after_goto,
                "label" => {
                    pos == 0 && !rest[text.len()..].starts_with(':') && line.trim_end().ends_with(':')
                }
                _ => true,
            };
            if ok {
                matched = Some((idx, text.len()));
                break;
            }
        }

        let Some((idx, len)) = matched else {
            unclassified += 1;
            pos += rest.chars().next().map_or(1, char::len_utf8);
            continue;
        };
        let def = &CATALOG[idx];
        let text = &rest[..len];

        match def.category {
            Category::Preprocessor => {
                let body = text[1..].trim_start();
                let word: String = body.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                facts.operations.push(Operation { text: format!("#{word}"), pattern: idx });
                if matches!(word.as_str(), "define" | "undef" | "ifdef" | "ifndef") {
                    let name: String = body[word.len()..]
                        .trim_start()
                        .chars()
                        .take_while(|c| c.is_alphanumeric() || *c == '_')
                        .collect();
                    if !name.is_empty() {
                        facts.variables.insert(name);
                    }
                }
            }
            Category::Call => {
                let callee = text[..text.len() - 1].trim_end();
                facts.operations.push(Operation { text: callee.to_string(), pattern: idx });
                // Leave the opening parenthesis for the grouping pattern.
                pos += len - 1;
                prev_category = Some(Category::Call);
                prev_text = callee.to_string();
                statement_start = false;
                after_member = false;
                continue;
            }
            Category::Cast => {
                let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
                facts.operations.push(Operation { text: compact, pattern: idx });
            }
            Category::Control | Category::Access | Category::Operator => {
                facts.operations.push(Operation { text: text.to_string(), pattern: idx });
            }
            Category::Declaration => {
                if def.name == "declaration" {
                    let caps = regexes[idx].captures(rest).expect("matched above");
                    let ty = caps.get(1).expect("type group").as_str();
                    types.insert(ty.to_string());
                    pos += ty.len();
                    prev_category = Some(Category::Declaration);
                    prev_text = ty.to_string();
                    statement_start = false;
                    continue;
                }
            }
            Category::Identifier => {
                let keep = !after_member
                    && !after_goto
                    && !after_tag
                    && !is_type_name(text)
                    && !types.contains(text)
                    && !RESERVED.contains(&text);
                if keep {
                    facts.variables.insert(text.to_string());
                }
            }
            Category::Literal | Category::Label | Category::Punctuation => {}
        }

        after_member = def.name == "member_access";
        after_goto = def.name == "goto_statement";
        after_tag = def.name == "type_keyword" && matches!(text, "struct" | "union" | "enum" | "class");
        statement_start = match def.name {
            "type_keyword" => statement_start,
            "separator" => text == ";",
            "grouping" => text == "{" || text == "}" || (text == "(" && prev_text == "for"),
            "label" | "else_clause" | "do_loop" => true,
            _ => false,
        };
        prev_category = Some(def.category);
        prev_text = text.to_string();
        pos += len;
    }

    (facts, unclassified)
}

/// Classify one normalized line. Control-block fields are left at their
/// defaults; see [`block_structure`].
pub fn statement_facts(line: &str) -> Result<StatementFacts, CodeModelError> {
    let (facts, unclassified) = scan_line(line);
    if unclassified > 0 {
        return Err(CodeModelError::UnclassifiedStatement(line.to_string()));
    }
    Ok(facts)
}

/// [`statement_facts`] that skips unclassifiable characters.
pub fn statement_facts_lenient(line: &str) -> StatementFacts {
    scan_line(line).0
}

const HEADER_KEYWORDS: [&str; 6] = ["if", "else", "for", "while", "switch", "do"];

#[derive(Debug)]
struct Frame {
    header: Option<BlockId>,
    braced: bool,
}

fn control_of(stack: &[Frame]) -> (usize, Option<BlockId>) {
    let depth = stack.iter().filter(|f| f.header.is_some()).count();
    let id = stack.iter().rev().find_map(|f| f.header);
    (depth, id)
}

fn pop_finished_single(stack: &mut Vec<Frame>) {
    while stack.last().is_some_and(|f| !f.braced) {
        stack.pop();
    }
}

/// Nesting depth and innermost control structure for every line of a
/// normalized text. Header lines belong to the enclosing block; a brace-less
/// body is governed by its header for exactly one statement.
pub fn block_structure(lines: &[&str]) -> Vec<(usize, Option<BlockId>)> {
    let mut stack: Vec<Frame> = Vec::new();
    let mut pending: Option<BlockId> = None;
    let mut out = Vec::with_capacity(lines.len());

    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        let mut body = line;
        while let Some(rest) = body.strip_prefix('}') {
            if stack.last().is_some_and(|f| f.braced) {
                stack.pop();
            }
            pop_finished_single(&mut stack);
            body = rest.trim_start();
        }

        if let Some(h) = pending.take() {
            if let Some(rest) = body.strip_prefix('{') {
                out.push(control_of(&stack));
                stack.push(Frame { header: Some(h), braced: true });
                scan_braces(rest, &mut stack);
                continue;
            }
            stack.push(Frame { header: Some(h), braced: false });
        }
        out.push(control_of(&stack));

        let first_word: String = body.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        let is_header = HEADER_KEYWORDS.contains(&first_word.as_str());
        let ends_statement = body.ends_with(';');

        if is_header && !ends_statement && !body.ends_with('}') {
            if body.ends_with('{') {
                let opens = body.matches('{').count();
                let closes = body.matches('}').count();
                stack.push(Frame { header: Some(i), braced: true });
                for _ in 1..opens.saturating_sub(closes) {
                    stack.push(Frame { header: None, braced: true });
                }
            } else {
                pending = Some(i);
            }
            continue;
        }

        let popped_braced = scan_braces(body, &mut stack);
        if ends_statement || popped_braced {
            pop_finished_single(&mut stack);
        }
    }
    out
}

/// Apply the braces on a line (outside literals). Returns true if a braced
/// frame was closed.
fn scan_braces(text: &str, stack: &mut Vec<Frame>) -> bool {
    let mut closed = false;
    for tok in super::lexer::tokenize(text) {
        match tok.text(text) {
            "{" => stack.push(Frame { header: None, braced: true }),
            "}" => {
                if stack.last().is_some_and(|f| f.braced) {
                    stack.pop();
                    closed = true;
                }
                pop_finished_single(stack);
            }
            _ => {}
        }
    }
    closed
}

/// Statement facts for every line of a normalized text, with control-block
/// fields filled in.
pub fn annotate_lines(lines: &[&str]) -> Vec<StatementFacts> {
    block_structure(lines)
        .into_iter()
        .zip(lines)
        .map(|((depth, id), line)| {
            let mut f = statement_facts_lenient(line);
            f.control_depth = depth;
            f.control_block_id = id;
            f
        })
        .collect()
}
