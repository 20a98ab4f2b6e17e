//! Rule-based repair of raw completions into whole test files.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::TestTemplate;
use crate::cxx::{self, BraceError, ItemKind, Token, TokenKind};
use crate::generator::{Candidate, PromptBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    ProseStripping,
    FenceStripping,
    DuplicateCodeRemoval,
    IncompleteClassRemoval,
    IncludeRestoration,
    DeclRestoration,
    TruncationTrim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixRule {
    pub id: &'static str,
    pub description: &'static str,
    pub pattern_kind: PatternKind,
}

/// Rules in application order.
pub const RULES: &[FixRule] = &[
    FixRule { id: "fence-strip", description: "keep only the contents of markdown code fences", pattern_kind: PatternKind::FenceStripping },
    FixRule {
        id: "prose-strip",
        description: "drop natural-language lines outside comments and strings",
        pattern_kind: PatternKind::ProseStripping,
    },
    FixRule {
        id: "comment-paragraph-strip",
        description: "drop multi-line comment paragraphs the template does not have",
        pattern_kind: PatternKind::ProseStripping,
    },
    FixRule {
        id: "prompt-echo-removal",
        description: "drop a leading copy of the prompt context",
        pattern_kind: PatternKind::DuplicateCodeRemoval,
    },
    FixRule {
        id: "duplicate-definition-removal",
        description: "drop definitions repeated verbatim from the code under test",
        pattern_kind: PatternKind::DuplicateCodeRemoval,
    },
    FixRule {
        id: "incomplete-class-removal",
        description: "drop a trailing class or function whose braces never close",
        pattern_kind: PatternKind::IncompleteClassRemoval,
    },
    FixRule {
        id: "template-splice",
        description: "prepend the template prefix to a bare body completion",
        pattern_kind: PatternKind::DeclRestoration,
    },
    FixRule {
        id: "decl-restoration",
        description: "re-insert template globals and helpers the candidate dropped",
        pattern_kind: PatternKind::DeclRestoration,
    },
    FixRule {
        id: "include-restoration",
        description: "template includes present exactly once; unknown project headers dropped",
        pattern_kind: PatternKind::IncludeRestoration,
    },
    FixRule {
        id: "truncation-trim",
        description: "cut a token-limit fragment back to a statement boundary and close it",
        pattern_kind: PatternKind::TruncationTrim,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixReport {
    pub candidate_ref: String,
    pub applied_rules: Vec<String>,
    pub before: String,
    pub after: String,
    pub unchanged: bool,
    pub unfixable: bool,
}

/// What the rules may consult besides the candidate text.
#[derive(Debug, Clone, Copy)]
pub struct FixContext<'a> {
    pub prompt: Option<&'a PromptBundle>,
    /// Production source texts.
    pub production: &'a [String],
    /// File names of project headers; quoted includes of anything else are
    /// dropped. `None` keeps every include.
    pub known_headers: Option<&'a BTreeSet<String>>,
    /// Identical leading lines needed before a prompt echo is removed.
    pub echo_min_lines: usize,
}

impl Default for FixContext<'_> {
    fn default() -> Self {
        FixContext { prompt: None, production: &[], known_headers: None, echo_min_lines: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixOutcome {
    pub text: String,
    pub applied: Vec<&'static str>,
    pub unfixable: bool,
}

pub fn fix(candidate: &Candidate, template: &TestTemplate, ctx: &FixContext<'_>) -> (String, FixReport) {
    let out = fix_text(&candidate.raw_text, template, ctx);
    let report = FixReport {
        candidate_ref: candidate.id.clone(),
        applied_rules: out.applied.iter().map(|s| s.to_string()).collect(),
        before: candidate.raw_text.clone(),
        after: out.text.clone(),
        unchanged: out.text == candidate.raw_text,
        unfixable: out.unfixable,
    };
    (out.text, report)
}

pub fn fix_text(raw: &str, template: &TestTemplate, ctx: &FixContext<'_>) -> FixOutcome {
    let tpl = template.render();
    let tpl_lines: HashSet<&str> = tpl.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut text = raw.to_string();
    let mut applied = Vec::new();
    for rule in RULES {
        let next = match rule.id {
            "fence-strip" => strip_fences(&text),
            "prose-strip" => strip_prose(&text, &tpl_lines),
            "comment-paragraph-strip" => strip_comment_paragraphs(&text, &tpl_lines),
            "prompt-echo-removal" => remove_prompt_echo(&text, ctx),
            "duplicate-definition-removal" => remove_duplicate_definitions(&text, ctx.production, &tpl),
            "incomplete-class-removal" => remove_incomplete_trailer(&text),
            "template-splice" => splice_template(&text, template),
            "decl-restoration" => restore_decls(&text, template),
            "include-restoration" => restore_includes(&text, template, ctx.known_headers),
            "truncation-trim" => trim_truncation(&text, template),
            _ => unreachable!("unknown rule {}", rule.id),
        };
        if let Some(next) = next {
            let next = tidy(&next, raw.ends_with('\n'));
            if next != text {
                text = next;
                applied.push(rule.id);
            }
        }
    }
    let unfixable = text.trim().is_empty() || cxx::check_braces(&cxx::tokenize(&text)).is_err();
    FixOutcome { text, applied, unfixable }
}

/// `fix(fix(x)) == fix(x)`.
pub fn fix_idempotence_check(text: &str, template: &TestTemplate, ctx: &FixContext<'_>) -> bool {
    let once = fix_text(text, template, ctx);
    let twice = fix_text(&once.text, template, ctx);
    once.text == twice.text
}

/// Drops leading blank lines and trailing whitespace; ends with a newline
/// iff the raw candidate did.
fn tidy(s: &str, newline: bool) -> String {
    let start =
        s.char_indices().find(|&(_, c)| !c.is_whitespace()).map(|(i, _)| s[..i].rfind('\n').map_or(0, |n| n + 1)).unwrap_or(s.len());
    let mut out = s[start..].trim_end().to_string();
    if newline && !out.is_empty() {
        out.push('\n');
    }
    out
}

fn keep_lines(text: &str, keep: impl Fn(usize, &str) -> bool) -> String {
    text.split_inclusive('\n').enumerate().filter(|(i, l)| keep(*i, l)).map(|(_, l)| l).collect()
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn strip_fences(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let first = lines.iter().position(|l| is_fence(l))?;
    // text before the first fence that looks like code means the completion
    // started inside a block and the first fence closes it
    let classes = line_classes(text);
    let mut inside = (0..first).any(|i| {
        let l = lines[i].trim();
        !l.is_empty() && classes[i] != LineClass::Prose
    });
    let mut keep = vec![false; lines.len()];
    for (i, l) in lines.iter().enumerate() {
        if is_fence(l) {
            inside = !inside;
        } else {
            keep[i] = inside;
        }
    }
    Some(keep_lines(text, |i, _| keep[i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineClass {
    Blank,
    /// Inside a multi-line comment or literal started on an earlier line.
    Continued,
    Directive,
    Comment,
    Code,
    Prose,
}

const KEYWORDS: &[&str] = &[
    "alignas",
    "alignof",
    "auto",
    "bool",
    "break",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "constexpr",
    "continue",
    "decltype",
    "default",
    "delete",
    "do",
    "double",
    "else",
    "enum",
    "explicit",
    "extern",
    "false",
    "float",
    "for",
    "friend",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "mutable",
    "namespace",
    "new",
    "noexcept",
    "nullptr",
    "operator",
    "override",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "template",
    "this",
    "throw",
    "true",
    "try",
    "typedef",
    "typename",
    "union",
    "unsigned",
    "using",
    "virtual",
    "void",
    "volatile",
    "while",
    "size_t",
];

fn line_classes(text: &str) -> Vec<LineClass> {
    let tokens = cxx::tokenize(text);
    let n_lines = text.split_inclusive('\n').count();
    let mut per_line: Vec<Vec<&Token<'_>>> = vec![Vec::new(); n_lines + 1];
    let mut continued = vec![false; n_lines + 2];
    for t in &tokens {
        per_line[t.line - 1].push(t);
        for l in t.line + 1..=t.end_line() {
            continued[l] = true;
        }
    }
    text.split_inclusive('\n')
        .enumerate()
        .map(|(i, line)| {
            let toks = &per_line[i];
            if continued[i + 1] {
                LineClass::Continued
            } else if line.trim().is_empty() {
                LineClass::Blank
            } else if toks.first().is_some_and(|t| t.kind == TokenKind::Directive) {
                LineClass::Directive
            } else if toks.iter().all(|t| t.is_comment()) {
                LineClass::Comment
            } else if is_prose(line, toks) {
                LineClass::Prose
            } else {
                LineClass::Code
            }
        })
        .collect()
}

fn is_prose(line: &str, toks: &[&Token<'_>]) -> bool {
    let code: Vec<&&Token<'_>> = toks.iter().filter(|t| !t.is_comment()).collect();
    let words = code
        .iter()
        .filter(|t| t.kind != TokenKind::Str)
        .map(|t| {
            if t.kind == TokenKind::Char {
                t.text.split(|c: char| !c.is_ascii_alphabetic()).filter(|w| !w.is_empty()).count()
            } else {
                usize::from(t.kind == TokenKind::Ident)
            }
        })
        .sum::<usize>();
    if words < 3 {
        return false;
    }
    let bad_lex = code.iter().any(|t| {
        (t.kind == TokenKind::Punct && matches!(t.text, "`" | "@" | "$"))
            || (t.kind == TokenKind::Punct && !t.text.is_ascii())
            || (t.kind == TokenKind::Char && (t.text.len() > 6 || !t.text.ends_with('\'') || t.text.len() < 3))
    });
    let mut run = 0;
    let mut max_run = 0;
    for t in &code {
        if t.kind == TokenKind::Ident && !KEYWORDS.contains(&t.text) {
            run += 1;
            max_run = max_run.max(run);
        } else if !(t.kind == TokenKind::Ident) {
            run = 0;
        }
    }
    let last = code.last().map(|t| t.text).unwrap_or("");
    let sentence_end = matches!(last, "." | "!" | "?" | ":") || line.trim_end().ends_with("...");
    let code_end = matches!(
        last,
        ";" | "{"
            | "}"
            | ")"
            | ","
            | "\\"
            | "("
            | "["
            | "="
            | "+"
            | "-"
            | "*"
            | "/"
            | "&"
            | "|"
            | "<"
            | ">"
            | "&&"
            | "||"
            | "<<"
            | ">>"
            | "%"
            | "^"
    ) || code.last().is_some_and(|t| matches!(t.kind, TokenKind::Str | TokenKind::Number));
    bad_lex || sentence_end || (!code_end && max_run >= 3)
}

fn strip_prose(text: &str, tpl_lines: &HashSet<&str>) -> Option<String> {
    let classes = line_classes(text);
    if !classes.contains(&LineClass::Prose) {
        return None;
    }
    Some(keep_lines(text, |i, l| classes[i] != LineClass::Prose || tpl_lines.contains(l.trim())))
}

fn strip_comment_paragraphs(text: &str, tpl_lines: &HashSet<&str>) -> Option<String> {
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let classes = line_classes(text);
    let mut drop = vec![false; lines.len()];
    let mut i = 0;
    while i < lines.len() {
        let is_para_line =
            |k: usize| matches!(classes[k], LineClass::Comment | LineClass::Continued) && !tpl_lines.contains(lines[k].trim());
        if classes[i] == LineClass::Comment && is_para_line(i) {
            let mut j = i + 1;
            while j < lines.len() && is_para_line(j) {
                j += 1;
            }
            let words: usize =
                lines[i..j].iter().map(|l| l.split(|c: char| !c.is_ascii_alphabetic()).filter(|w| w.len() > 1).count()).sum();
            if j - i >= 2 && words >= 6 {
                drop[i..j].iter_mut().for_each(|d| *d = true);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    if !drop.contains(&true) {
        return None;
    }
    Some(keep_lines(text, |i, _| !drop[i]))
}

fn remove_prompt_echo(text: &str, ctx: &FixContext<'_>) -> Option<String> {
    let prompt = ctx.prompt?;
    let head = prompt.rendered_prompt.strip_suffix(&prompt.template_prefix).unwrap_or(&prompt.rendered_prompt);
    let head: Vec<&str> = head.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if head.len() < ctx.echo_min_lines {
        return None;
    }
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let content: Vec<(usize, &str)> = lines.iter().enumerate().map(|(i, l)| (i, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
    let mut best = 0;
    for start in 0..head.len() {
        let run = head[start..].iter().zip(&content).take_while(|(h, (_, c))| h == &c).count();
        best = best.max(run);
    }
    if best < ctx.echo_min_lines {
        return None;
    }
    let cut = content[best - 1].0;
    Some(keep_lines(text, |i, _| i > cut))
}

/// Token depth of the text's start: a body completion begins inside the
/// entry point.
fn start_depth(text: &str) -> usize {
    let (_, min) = cxx::brace_profile(text);
    (-min).max(0) as usize
}

fn remove_duplicate_definitions(text: &str, production: &[String], tpl: &str) -> Option<String> {
    let mut defs = HashSet::new();
    for src in production {
        let toks = cxx::tokenize(src);
        for it in cxx::items(&toks, 0) {
            let body = it.text(src);
            if it.kind == ItemKind::Code && it.complete && body.contains('{') {
                defs.insert(cxx::squash_ws(body));
            }
        }
    }
    let tpl_sq = cxx::squash_ws(tpl);
    let toks = cxx::tokenize(text);
    let its = cxx::items(&toks, start_depth(text));
    let mut cut: Vec<(usize, usize)> = Vec::new();
    for (n, it) in its.iter().enumerate() {
        let sq = cxx::squash_ws(it.text(text));
        if it.kind == ItemKind::Code && defs.contains(&sq) && !tpl_sq.contains(&sq) {
            // take attached comments and the file marker with it
            let mut start = it.start;
            let mut k = n;
            while k > 0 && its[k - 1].kind == ItemKind::Comment && its[k - 1].end_line + 1 >= its[k].start_line {
                k -= 1;
                start = its[k].start;
            }
            cut.push((line_start(text, start), line_end(text, it.end)));
        }
    }
    for l in text.split_inclusive('\n').scan(0, |off, l| {
        let s = *off;
        *off += l.len();
        Some((s, l))
    }) {
        if l.1.trim_start().starts_with("// file: ") && !tpl.contains(l.1.trim()) {
            cut.push((l.0, l.0 + l.1.len()));
        }
    }
    if cut.is_empty() {
        return None;
    }
    Some(remove_ranges(text, cut))
}

fn line_start(text: &str, at: usize) -> usize {
    text[..at].rfind('\n').map_or(0, |n| n + 1)
}

fn line_end(text: &str, at: usize) -> usize {
    text[at..].find('\n').map_or(text.len(), |n| at + n + 1)
}

fn remove_ranges(text: &str, mut ranges: Vec<(usize, usize)>) -> String {
    ranges.sort();
    let mut out = String::new();
    let mut pos = 0;
    for (a, b) in ranges {
        if a > pos {
            out.push_str(&text[pos..a]);
        }
        pos = pos.max(b);
    }
    out.push_str(&text[pos.min(text.len())..]);
    out
}

const CONTROL: &[&str] = &["if", "for", "while", "switch", "do", "else", "try", "catch", "return"];

/// Class, struct, union or function definition head.
fn is_definition_head(toks: &[Token<'_>]) -> bool {
    let code: Vec<&Token<'_>> = toks.iter().filter(|t| t.is_code()).collect();
    let Some(brace) = code.iter().position(|t| t.is("{")) else {
        return false;
    };
    let head = &code[..brace];
    let Some(first) = head.first() else {
        return false;
    };
    if CONTROL.contains(&first.text) || cxx::TEST_MACROS.contains(&first.text) {
        return false;
    }
    if matches!(first.text, "class" | "struct" | "union" | "template" | "namespace") {
        return true;
    }
    let Some(paren) = head.iter().position(|t| t.is("(")) else {
        return false;
    };
    paren >= 2
        && head[paren - 1].kind == TokenKind::Ident
        && head[paren - 1].text != "main"
        && head.last().is_some_and(|t| t.is(")") || matches!(t.text, "const" | "override" | "noexcept"))
}

fn remove_incomplete_trailer(text: &str) -> Option<String> {
    let toks = cxx::tokenize(text);
    let its = cxx::items(&toks, start_depth(text));
    let last = its.iter().rposition(|it| it.kind == ItemKind::Code)?;
    let it = &its[last];
    if it.complete || last == 0 || !its[..last].iter().any(|i| i.kind == ItemKind::Code) {
        return None;
    }
    if !is_definition_head(&toks[it.first..it.last]) {
        return None;
    }
    let mut start = it.start;
    let mut k = last;
    while k > 0 && its[k - 1].kind == ItemKind::Comment {
        k -= 1;
        start = its[k].start;
    }
    Some(text[..line_start(text, start)].to_string())
}

fn has_entry(text: &str) -> bool {
    let toks = cxx::tokenize(text);
    let its = cxx::items(&toks, 0);
    let truncated_main = its.iter().any(|it| !it.complete && entry_item_kind(&toks[it.first..it.last]));
    truncated_main || cxx::is_standalone(text)
}

/// True for an item that opens `main(...)` or a test-registration macro.
fn entry_item_kind(toks: &[Token<'_>]) -> bool {
    let code: Vec<&Token<'_>> = toks.iter().filter(|t| t.is_code()).collect();
    code.first().is_some_and(|t| cxx::TEST_MACROS.contains(&t.text)) || code.windows(2).any(|w| w[0].is_ident("main") && w[1].is("("))
}

fn splice_template(text: &str, template: &TestTemplate) -> Option<String> {
    if text.trim().is_empty() || has_entry(text) {
        return None;
    }
    let mut out = template.prefix();
    out.push_str(text);
    Some(out)
}

fn restore_decls(text: &str, template: &TestTemplate) -> Option<String> {
    if template.globals_and_helpers.is_empty() {
        return None;
    }
    let toks = cxx::tokenize(text);
    let its = cxx::items(&toks, 0);
    let entry = its.iter().position(|it| it.kind == ItemKind::Code && entry_item_kind(&toks[it.first..it.last]))?;
    let (funcs, classes, names) = cxx::declarations(&toks);
    let declared: HashSet<&str> =
        funcs.iter().map(|f| f.name.as_str()).chain(classes.iter().map(String::as_str)).chain(names.iter().map(String::as_str)).collect();
    let have = cxx::squash_ws(text);
    let mut missing = String::new();
    for g in &template.globals_and_helpers {
        let sq = cxx::squash_ws(g);
        if have.contains(&sq) {
            continue;
        }
        let gt = cxx::tokenize(g);
        let (gf, gc, gn) = cxx::declarations(&gt);
        let g_names: Vec<&str> =
            gf.iter().map(|f| f.name.as_str()).chain(gc.iter().map(String::as_str)).chain(gn.iter().map(String::as_str)).collect();
        let is_code = gt.iter().any(Token::is_code);
        if !is_code || g_names.iter().any(|n| declared.contains(n)) {
            continue;
        }
        missing.push_str(g);
        missing.push('\n');
    }
    if missing.is_empty() {
        return None;
    }
    // before the entry point and the comments attached to it
    let mut k = entry;
    while k > 0 && its[k - 1].kind == ItemKind::Comment {
        k -= 1;
    }
    let at = line_start(text, its[k].start);
    Some(format!("{}{}{}", &text[..at], missing, &text[at..]))
}

fn restore_includes(text: &str, template: &TestTemplate, known: Option<&BTreeSet<String>>) -> Option<String> {
    let toks = cxx::tokenize(text);
    if !toks.iter().any(Token::is_code) {
        return None;
    }
    let wanted: Vec<(String, bool)> = template.includes.iter().filter_map(|i| cxx::include_target(i)).collect();
    let mut seen: HashSet<(String, bool)> = HashSet::new();
    // first line offset of each kept template include
    let mut found: Vec<((String, bool), usize)> = Vec::new();
    let mut cut = Vec::new();
    let mut after_last = None;
    for t in toks.iter().filter(|t| t.kind == TokenKind::Directive) {
        let Some(target) = cxx::include_target(t.text) else {
            continue;
        };
        let duplicate = wanted.contains(&target) && !seen.insert(target.clone());
        let unknown = target.1
            && !wanted.contains(&target)
            && known.is_some_and(|k| {
                let base = target.0.rsplit('/').next().unwrap_or(&target.0);
                !k.contains(base)
            });
        if duplicate || unknown {
            cut.push((line_start(text, t.offset), line_end(text, t.end())));
        } else {
            after_last = Some(line_end(text, t.end()));
            if wanted.contains(&target) {
                found.push((target, line_start(text, t.offset)));
            }
        }
    }
    // each missing include goes before the next template include that is
    // present, else after the last include kept
    let mut inserts: Vec<(usize, usize, &String)> = Vec::new();
    for (n, inc) in template.includes.iter().enumerate() {
        let Some(target) = cxx::include_target(inc) else {
            continue;
        };
        if seen.contains(&target) {
            continue;
        }
        let next = template.includes[n + 1..]
            .iter()
            .filter_map(|i| cxx::include_target(i))
            .find_map(|t| found.iter().find(|(f, _)| *f == t).map(|(_, at)| *at));
        inserts.push((next.or(after_last).unwrap_or(0), n, inc));
    }
    if cut.is_empty() && inserts.is_empty() {
        return None;
    }
    inserts.sort();
    cut.sort();
    let mut out = String::new();
    let mut pos = 0;
    let mut ins = inserts.into_iter().peekable();
    for (a, b) in cut.into_iter().chain(std::iter::once((text.len(), text.len()))) {
        while let Some(&(at, _, inc)) = ins.peek() {
            if at > a {
                break;
            }
            out.push_str(&text[pos..at.max(pos)]);
            pos = pos.max(at);
            if !out.is_empty() && !out.ends_with('\n') {
                out.push('\n');
            }
            out.push_str(inc);
            out.push('\n');
            ins.next();
        }
        out.push_str(&text[pos..a.max(pos)]);
        pos = pos.max(b);
    }
    Some(out)
}

fn trim_truncation(text: &str, template: &TestTemplate) -> Option<String> {
    let mut cur = text.to_string();
    for _ in 0..64 {
        let toks = cxx::tokenize(&cur);
        match cxx::check_braces(&toks) {
            Ok(()) => break,
            Err(BraceError::Unexpected { line }) => {
                let t = toks.iter().rev().find(|t| t.line == line && t.is("}"))?;
                let (a, b) = if cur.split('\n').nth(line - 1).is_some_and(|l| l.trim() == "}") {
                    (line_start(&cur, t.offset), line_end(&cur, t.offset))
                } else {
                    (t.offset, t.end())
                };
                cur = remove_ranges(&cur, vec![(a, b)]);
            }
            Err(BraceError::Unclosed { .. }) => {
                let its = cxx::items(&toks, 0);
                let it = its.iter().rev().find(|it| !it.complete && it.kind == ItemKind::Code)?;
                if entry_item_kind(&toks[it.first..it.last]) {
                    cur = close_entry(&cur, &toks, it.first, it.last, template);
                } else {
                    cur = cur[..line_start(&cur, it.start)].to_string();
                }
            }
        }
    }
    (cur != text).then_some(cur)
}

/// Cuts a truncated entry point after its last complete statement and
/// closes every block still open there.
fn close_entry(text: &str, toks: &[Token<'_>], first: usize, last: usize, template: &TestTemplate) -> String {
    let mut depth = 0i64;
    let mut parens = 0i64;
    let mut cut: Option<(usize, i64)> = None;
    for t in &toks[first..last] {
        if !t.is_code() {
            continue;
        }
        match t.text {
            "(" | "[" => parens += 1,
            ")" | "]" => parens -= 1,
            "{" => {
                depth += 1;
                if depth == 1 {
                    cut = Some((t.end(), depth));
                }
            }
            "}" => {
                depth -= 1;
                if parens == 0 && depth >= 1 {
                    cut = Some((t.end(), depth));
                }
            }
            ";" if parens == 0 && depth >= 1 => cut = Some((t.end(), depth)),
            _ => {}
        }
    }
    let Some((at, depth)) = cut else {
        return text[..line_start(text, toks[first].offset)].to_string();
    };
    let mut out = text[..at].to_string();
    out.push('\n');
    for d in (1..depth).rev() {
        out.push_str(&"  ".repeat(d as usize));
        out.push_str("}\n");
    }
    let close = template.entry_close.trim();
    if close.starts_with('}') {
        out.push_str(close);
    } else {
        out.push('}');
    }
    out.push('\n');
    out
}
