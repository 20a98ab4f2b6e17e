//! Lexical C++ scanning shared by every analysis in the crate.
//!
//! Nothing here builds an AST. The lexer splits a translation unit into
//! tokens (identifiers, literals, punctuation, comments and whole
//! preprocessor lines) and the helpers on top recover just enough structure
//! for the pipeline: brace balance, top-level items, function spans,
//! `#include` lists and OpenMP pragmas.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    LineComment,
    BlockComment,
    /// A whole preprocessor line, continuation lines included.
    Directive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// 1-based line of the first character.
    pub line: usize,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl<'a> Token<'a> {
    pub fn is_comment(&self) -> bool {
        matches!(self.kind, TokenKind::LineComment | TokenKind::BlockComment)
    }

    pub fn is_code(&self) -> bool {
        !self.is_comment() && self.kind != TokenKind::Directive
    }

    pub fn is(&self, punct: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == punct
    }

    pub fn is_ident(&self, name: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == name
    }

    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    /// Line of the last character.
    pub fn end_line(&self) -> usize {
        self.line + self.text.matches('\n').count()
    }
}

const PUNCT3: &[&str] = &["<<=", ">>=", "...", "->*", "<=>"];
const PUNCT2: &[&str] =
    &["::", "->", "<<", ">>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ".*", "##"];

/// Tokenizes C++ source. Never fails: unterminated literals and comments run
/// to the end of their line (or file, for block comments).
pub fn tokenize(src: &str) -> Vec<Token<'_>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    // true while only whitespace has been seen on the current line
    let mut line_start = true;

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            line_start = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let start_line = line;
        let kind;
        if c == b'#' && line_start {
            // directive, honouring backslash continuations
            while i < bytes.len() && bytes[i] != b'\n' {
                if bytes[i] == b'\\' && i + 1 < bytes.len() && bytes[i + 1] == b'\n' {
                    i += 2;
                    line += 1;
                    continue;
                }
                // a trailing // comment belongs to the directive line
                i += 1;
            }
            kind = TokenKind::Directive;
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            kind = TokenKind::LineComment;
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            i += 2;
            while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(bytes.len());
            kind = TokenKind::BlockComment;
        } else if c == b'"' {
            i = scan_quoted(bytes, i, b'"');
            kind = TokenKind::Str;
        } else if c == b'\'' {
            i = scan_quoted(bytes, i, b'\'');
            kind = TokenKind::Char;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() {
                let b = bytes[i];
                if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' {
                    i += 1;
                } else if b == b'\'' && bytes.get(i + 1).is_some_and(u8::is_ascii_alphanumeric) {
                    i += 1;
                } else if (b == b'+' || b == b'-') && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P') && !src[start..i].starts_with("0x")
                {
                    i += 1;
                } else {
                    break;
                }
            }
            kind = TokenKind::Number;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if bytes.get(i) == Some(&b'"') && matches!(word, "R" | "u8R" | "LR" | "uR" | "UR") {
                let (end, newlines) = scan_raw_string(bytes, i);
                i = end;
                line += newlines;
                kind = TokenKind::Str;
            } else if bytes.get(i) == Some(&b'"') && matches!(word, "u8" | "L" | "u" | "U") {
                i = scan_quoted(bytes, i, b'"');
                kind = TokenKind::Str;
            } else {
                kind = TokenKind::Ident;
            }
        } else {
            let rest = &src[i..];
            let len = PUNCT3
                .iter()
                .chain(PUNCT2)
                .find(|p| rest.starts_with(**p))
                .map(|p| p.len())
                .unwrap_or_else(|| rest.chars().next().map_or(1, char::len_utf8));
            i += len;
            kind = TokenKind::Punct;
        }
        line_start = false;
        out.push(Token { kind, text: &src[start..i], line: start_line, offset: start });
    }
    out
}

fn scan_quoted(bytes: &[u8], mut i: usize, quote: u8) -> usize {
    i += 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            b if b == quote => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

fn scan_raw_string(bytes: &[u8], quote: usize) -> (usize, usize) {
    let mut i = quote + 1;
    let delim_start = i;
    while i < bytes.len() && bytes[i] != b'(' && bytes[i] != b'\n' {
        i += 1;
    }
    let delim = &bytes[delim_start..i];
    let mut newlines = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            newlines += 1;
        }
        if bytes[i] == b')' && bytes[i + 1..].starts_with(delim) && bytes.get(i + 1 + delim.len()) == Some(&b'"') {
            return (i + 2 + delim.len(), newlines);
        }
        i += 1;
    }
    (bytes.len(), newlines)
}

/// Tokens other than comments and directives.
pub fn code_tokens(src: &str) -> Vec<Token<'_>> {
    tokenize(src).into_iter().filter(Token::is_code).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BraceError {
    /// A `}` with no open brace.
    Unexpected { line: usize },
    /// End of input with braces still open; `line` is the oldest open brace.
    Unclosed { line: usize, depth: usize },
}

impl std::error::Error for BraceError {}

impl fmt::Display for BraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BraceError::Unexpected { line } => write!(f, "unexpected `}}` at line {line}"),
            BraceError::Unclosed { line, depth } => {
                write!(f, "{depth} unclosed brace(s), oldest opened at line {line}")
            }
        }
    }
}

pub fn check_braces(tokens: &[Token<'_>]) -> Result<(), BraceError> {
    let mut open = Vec::new();
    for t in tokens.iter().filter(|t| t.is_code()) {
        if t.is("{") {
            open.push(t.line);
        } else if t.is("}") && open.pop().is_none() {
            return Err(BraceError::Unexpected { line: t.line });
        }
    }
    match open.first() {
        Some(&line) => Err(BraceError::Unclosed { line, depth: open.len() }),
        None => Ok(()),
    }
}

/// Net brace depth of a source fragment (opens minus closes), and the
/// minimum depth reached while scanning it.
pub fn brace_profile(src: &str) -> (i64, i64) {
    let mut depth = 0i64;
    let mut min = 0i64;
    for t in code_tokens(src) {
        if t.is("{") {
            depth += 1;
        } else if t.is("}") {
            depth -= 1;
            min = min.min(depth);
        }
    }
    (depth, min)
}

/// Index of the token closing the bracket opened at `open`.
pub fn matching_close(tokens: &[Token<'_>], open: usize) -> Option<usize> {
    let (o, c) = match tokens[open].text {
        "{" => ("{", "}"),
        "(" => ("(", ")"),
        "[" => ("[", "]"),
        _ => return None,
    };
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if !t.is_code() {
            continue;
        }
        if t.is(o) {
            depth += 1;
        } else if t.is(c) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    Directive,
    Comment,
    Code,
}

/// A top-level (or relative-depth-zero) item: a run of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    /// Token index range, half open.
    pub first: usize,
    pub last: usize,
    /// Byte range in the source, half open.
    pub start: usize,
    pub end: usize,
    pub start_line: usize,
    pub end_line: usize,
    /// False when input ended before the item's braces closed.
    pub complete: bool,
}

impl Item {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

/// Splits a token stream into items at brace depth `start_depth`.
///
/// A code item ends at a `;` at depth zero, or at a `}` returning to depth
/// zero unless the next code token is `;` (class bodies, initializers), in
/// which case the `;` is included. Comments and directives at depth zero are
/// items of their own. With `start_depth > 0` the first item is the
/// remainder of the enclosing block up to its closing brace.
pub fn items(tokens: &[Token<'_>], start_depth: usize) -> Vec<Item> {
    let mut out = Vec::new();
    let mut depth = start_depth as i64;
    let mut cur: Option<usize> = None;
    let mut i = 0;
    let push = |out: &mut Vec<Item>, kind, first: usize, last: usize, complete| {
        let a: &Token = &tokens[first];
        let b: &Token = &tokens[last - 1];
        out.push(Item { kind, first, last, start: a.offset, end: b.end(), start_line: a.line, end_line: b.end_line(), complete });
    };
    while i < tokens.len() {
        let t = &tokens[i];
        if depth <= 0 && cur.is_none() && !t.is_code() {
            let kind = if t.kind == TokenKind::Directive { ItemKind::Directive } else { ItemKind::Comment };
            push(&mut out, kind, i, i + 1, true);
            i += 1;
            continue;
        }
        if !t.is_code() {
            i += 1;
            continue;
        }
        let first = *cur.get_or_insert(i);
        if t.is("{") {
            depth += 1;
        } else if t.is("}") {
            depth -= 1;
            if depth == 0 {
                let mut last = i + 1;
                let next = tokens[last..].iter().position(Token::is_code).map(|p| p + last);
                if let Some(n) = next {
                    if tokens[n].is(";") {
                        last = n + 1;
                    }
                }
                push(&mut out, ItemKind::Code, first, last, true);
                cur = None;
                i = last;
                continue;
            }
        } else if t.is(";") && depth == 0 {
            push(&mut out, ItemKind::Code, first, i + 1, true);
            cur = None;
        }
        i += 1;
    }
    if let Some(first) = cur {
        let last = tokens[first..].iter().rposition(Token::is_code).map(|p| p + first + 1).unwrap_or(first + 1);
        push(&mut out, ItemKind::Code, first, last, depth == 0);
    }
    out
}

pub const TEST_MACROS: &[&str] =
    &["TEST", "TEST_F", "TEST_P", "TYPED_TEST", "TEST_CASE", "SCENARIO", "BOOST_AUTO_TEST_CASE", "BOOST_FIXTURE_TEST_CASE"];

/// Where the test entry point of a file sits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryPoint {
    /// `main` definition: token of the opening brace and of its match.
    Main { item: usize, open: usize, close: usize },
    /// First registered test macro; the body runs to the end of the file.
    Macro { item: usize },
}

/// Locates `int main(...) {` or the first test-registration macro among
/// top-level code items.
pub fn find_entry_point(tokens: &[Token<'_>], items: &[Item]) -> Option<EntryPoint> {
    for (n, item) in items.iter().enumerate() {
        if item.kind != ItemKind::Code {
            continue;
        }
        let toks = &tokens[item.first..item.last];
        // `main` directly followed by `(` at the item's outer level
        if let Some(p) = toks.iter().position(|t| t.is_ident("main")) {
            let after = toks[p + 1..].iter().find(|t| t.is_code());
            let before_ok = p == 0 || !toks[..p].iter().rev().find(|t| t.is_code()).is_some_and(|t| t.is("::") || t.is(".") || t.is("->"));
            if after.is_some_and(|t| t.is("(")) && before_ok {
                let paren = item.first + p + 1 + toks[p + 1..].iter().position(|t| t.is("(")).unwrap();
                let close_paren = matching_close(tokens, paren)?;
                let open = (close_paren..item.last).find(|&k| tokens[k].is("{"));
                if let Some(open) = open {
                    let close = matching_close(tokens, open)?;
                    return Some(EntryPoint::Main { item: n, open, close });
                }
            }
        }
        if let Some(first) = toks.iter().find(|t| t.is_code()) {
            if first.kind == TokenKind::Ident && TEST_MACROS.contains(&first.text) {
                return Some(EntryPoint::Macro { item: n });
            }
        }
    }
    None
}

/// True when the source has its own entry point: `int main` or a
/// recognized test-registration macro.
pub fn is_standalone(src: &str) -> bool {
    let tokens = tokenize(src);
    let its = items(&tokens, 0);
    if find_entry_point(&tokens, &its).is_some() {
        return true;
    }
    tokens.iter().any(|t| t.is_ident("CPPUNIT_TEST_SUITE_REGISTRATION"))
}

/// `#include` directive text, trimmed, in file order.
pub fn include_directives(src: &str) -> Vec<String> {
    tokenize(src).into_iter().filter(|t| t.kind == TokenKind::Directive && is_include(t.text)).map(|t| t.text.trim().to_string()).collect()
}

pub fn is_include(directive: &str) -> bool {
    directive.trim_start_matches('#').trim_start().starts_with("include")
}

/// Target of an include directive and whether it used quotes.
pub fn include_target(directive: &str) -> Option<(String, bool)> {
    let rest = directive.trim().trim_start_matches('#').trim_start().strip_prefix("include")?.trim();
    if let Some(r) = rest.strip_prefix('"') {
        return r.find('"').map(|e| (r[..e].to_string(), true));
    }
    if let Some(r) = rest.strip_prefix('<') {
        return r.find('>').map(|e| (r[..e].to_string(), false));
    }
    None
}

/// A function definition found at namespace scope or inside a class body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    /// Name as written, e.g. `optim::sumt` or `Grid::size`.
    pub qualified: String,
    pub start_line: usize,
    pub end_line: usize,
    /// Token indices of the body braces.
    pub open: usize,
    pub close: usize,
}

const NOT_FUNCTIONS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "return",
    "sizeof",
    "decltype",
    "alignof",
    "static_assert",
    "defined",
    "__attribute__",
    "noexcept",
    "throw",
    "new",
    "delete",
];

#[derive(Clone, Copy, PartialEq)]
enum Scope {
    Namespace,
    Class,
    Other,
}

/// Function definitions and declared class names at namespace/class scope.
pub fn declarations(tokens: &[Token<'_>]) -> (Vec<FunctionDef>, Vec<String>, Vec<String>) {
    let code: Vec<Token> = tokens.iter().copied().filter(Token::is_code).collect();
    let mut funcs = Vec::new();
    let mut decls = Vec::new();
    let mut classes = Vec::new();
    let mut stack: Vec<Scope> = Vec::new();
    let mut pending: Option<Scope> = None;
    let mut i = 0;
    while i < code.len() {
        let t = code[i];
        let at_decl_scope = stack.iter().all(|s| *s != Scope::Other);
        if t.is_ident("namespace") {
            pending = Some(Scope::Namespace);
        } else if (t.is_ident("class") || t.is_ident("struct") || t.is_ident("union")) && at_decl_scope {
            if let Some(n) = code.get(i + 1).filter(|n| n.kind == TokenKind::Ident) {
                // skip `enum class`, forward declarations resolve at `;`
                let opens = code[i + 1..].iter().take_while(|x| !x.is(";")).any(|x| x.is("{"));
                if opens && !(i > 0 && code[i - 1].is_ident("enum")) {
                    classes.push(n.text.to_string());
                    pending = Some(Scope::Class);
                }
            }
        } else if t.is("{") {
            stack.push(pending.take().unwrap_or(Scope::Other));
        } else if t.is("}") {
            stack.pop();
        } else if t.is(";") {
            pending = None;
        } else if t.is("(") && at_decl_scope && pending.is_none() && i > 0 && code[i - 1].kind == TokenKind::Ident {
            let name = code[i - 1].text;
            if !NOT_FUNCTIONS.contains(&name) && !name.starts_with("MPI_") {
                let mut start = i - 1;
                while start >= 2 && code[start - 1].is("::") && code[start - 2].kind == TokenKind::Ident {
                    start -= 2;
                }
                let qualified: String = code[start..i].iter().map(|t| t.text).collect();
                if let Some(close_paren) = matching_close(&code, i) {
                    // skip trailing qualifiers up to `{`, `;` or `:` (ctor init list)
                    let mut k = close_paren + 1;
                    while k < code.len() && !(code[k].is("{") || code[k].is(";") || code[k].is("=")) {
                        if code[k].is("(") {
                            k = matching_close(&code, k).unwrap_or(k) + 1;
                        } else {
                            k += 1;
                        }
                    }
                    if k < code.len() && code[k].is("{") {
                        if let Some(close) = matching_close(&code, k) {
                            funcs.push(FunctionDef {
                                name: name.to_string(),
                                qualified,
                                start_line: code[start].line,
                                end_line: code[close].line,
                                open: original_index(tokens, &code[k]),
                                close: original_index(tokens, &code[close]),
                            });
                            i = close + 1;
                            continue;
                        }
                    } else if k < code.len() && code[k].is(";") {
                        decls.push(name.to_string());
                        i = k + 1;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    (funcs, classes, decls)
}

fn original_index(tokens: &[Token<'_>], t: &Token<'_>) -> usize {
    tokens.iter().position(|x| x.offset == t.offset).expect("token from same stream")
}

/// Calls made inside a token range: identifiers directly followed by `(`,
/// excluding keywords. Returns (name, line) with the unqualified name.
pub fn calls_in<'a>(tokens: &[Token<'a>]) -> Vec<(&'a str, usize)> {
    let code: Vec<&Token> = tokens.iter().filter(|t| t.is_code()).collect();
    let mut out = Vec::new();
    for w in code.windows(2) {
        if w[0].kind == TokenKind::Ident && w[1].is("(") && !NOT_FUNCTIONS.contains(&w[0].text) {
            out.push((w[0].text, w[0].line));
        }
    }
    out
}

/// An OpenMP pragma: directive words after `#pragma omp`, clauses included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmpPragma {
    pub line: usize,
    /// Byte offset of the `#`.
    pub offset: usize,
    pub text: String,
}

impl OmpPragma {
    pub fn words(&self) -> Vec<&str> {
        self.text.split(|c: char| c.is_whitespace() || c == '(').filter(|w| !w.is_empty()).collect()
    }

    /// `parallel`, `parallel for`, `target teams distribute parallel for`...
    pub fn is_parallel(&self) -> bool {
        self.words().contains(&"parallel")
    }
}

pub fn omp_pragmas(tokens: &[Token<'_>]) -> Vec<OmpPragma> {
    tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Directive)
        .filter_map(|t| {
            let body = t.text.trim_start_matches('#').trim_start();
            let rest = body.strip_prefix("pragma")?.trim_start().strip_prefix("omp")?;
            let rest = rest.replace("\\\n", " ");
            Some(OmpPragma { line: t.line, offset: t.offset, text: rest.trim().to_string() })
        })
        .collect()
}

/// Byte extent of the statement governed by the directive at token index
/// `directive`: a braced block, a loop/if with its body, or a plain
/// statement up to `;`.
pub fn governed_extent(tokens: &[Token<'_>], directive: usize) -> Option<(usize, usize)> {
    let mut k = directive + 1;
    while k < tokens.len() && !tokens[k].is_code() {
        if tokens[k].kind == TokenKind::Directive {
            // stacked directives govern the same statement
        }
        k += 1;
    }
    let end = statement_end(tokens, k)?;
    Some((tokens[k].offset, tokens[end].end()))
}

/// Token index of the last token of the statement starting at `k`.
fn statement_end(tokens: &[Token<'_>], mut k: usize) -> Option<usize> {
    while k < tokens.len() && !tokens[k].is_code() {
        k += 1;
    }
    let t = tokens.get(k)?;
    if t.is("{") {
        return matching_close(tokens, k);
    }
    if t.is_ident("for") || t.is_ident("while") || t.is_ident("if") || t.is_ident("switch") {
        let paren = (k + 1..tokens.len()).find(|&j| tokens[j].is_code())?;
        let close = matching_close(tokens, paren)?;
        let end = statement_end(tokens, close + 1)?;
        if t.is_ident("if") {
            let next = (end + 1..tokens.len()).find(|&j| tokens[j].is_code());
            if let Some(n) = next.filter(|&n| tokens[n].is_ident("else")) {
                return statement_end(tokens, n + 1);
            }
        }
        return Some(end);
    }
    if t.is_ident("do") {
        let body_end = statement_end(tokens, k + 1)?;
        return (body_end + 1..tokens.len()).find(|&j| tokens[j].is(";"));
    }
    let mut depth = 0i64;
    for (j, tok) in tokens.iter().enumerate().skip(k) {
        if !tok.is_code() {
            continue;
        }
        match tok.text {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            ";" if depth == 0 => return Some(j),
            _ => {}
        }
        if depth < 0 {
            return Some(j.saturating_sub(1));
        }
    }
    None
}

/// Collapses whitespace runs to single spaces.
pub fn squash_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
