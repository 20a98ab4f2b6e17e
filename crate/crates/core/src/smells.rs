//! Static test-smell detection over C++ test files.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxx::{self, Token, TokenKind};

pub const RULE_VERSION: &str = "smells-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SmellKind {
    Ar,
    Clt,
    Ci,
    Em,
    Eh,
    Rp,
    Ra,
    Se,
    St,
    Ea,
    Lt,
    Da,
    Ut,
    It,
    Mnt,
}

impl SmellKind {
    pub const ALL: [SmellKind; 15] = [
        SmellKind::Ar,
        SmellKind::Clt,
        SmellKind::Ci,
        SmellKind::Em,
        SmellKind::Eh,
        SmellKind::Rp,
        SmellKind::Ra,
        SmellKind::Se,
        SmellKind::St,
        SmellKind::Ea,
        SmellKind::Lt,
        SmellKind::Da,
        SmellKind::Ut,
        SmellKind::It,
        SmellKind::Mnt,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SmellKind::Ar => "AR",
            SmellKind::Clt => "CLT",
            SmellKind::Ci => "CI",
            SmellKind::Em => "EM",
            SmellKind::Eh => "EH",
            SmellKind::Rp => "RP",
            SmellKind::Ra => "RA",
            SmellKind::Se => "SE",
            SmellKind::St => "ST",
            SmellKind::Ea => "EA",
            SmellKind::Lt => "LT",
            SmellKind::Da => "DA",
            SmellKind::Ut => "UT",
            SmellKind::It => "IT",
            SmellKind::Mnt => "MNT",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SmellKind::Ar => "Assertion Roulette",
            SmellKind::Clt => "Conditional Logic Test",
            SmellKind::Ci => "Constructor Initialization",
            SmellKind::Em => "Empty Test",
            SmellKind::Eh => "Exception Handling",
            SmellKind::Rp => "Redundant Print",
            SmellKind::Ra => "Redundant Assertion",
            SmellKind::Se => "Sensitive Equality",
            SmellKind::St => "Sleepy Test",
            SmellKind::Ea => "Eager Test",
            SmellKind::Lt => "Lazy Test",
            SmellKind::Da => "Duplicate Assert",
            SmellKind::Ut => "Unknown Test",
            SmellKind::It => "Ignored Test",
            SmellKind::Mnt => "Magic Number Test",
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SmellKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SmellKind::ALL.into_iter().find(|k| k.code().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown smell {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SmellFinding {
    pub file: PathBuf,
    pub line: usize,
    pub kind: SmellKind,
    pub evidence: String,
    pub rule_version: String,
}

#[derive(Debug, Error)]
pub enum SmellError {
    #[error("{file}: cannot lex: {message}")]
    LexFailure { file: String, message: String },
}

#[derive(Debug, Clone)]
pub struct SmellConfig {
    /// Eager test threshold: more than this many distinct production calls
    /// before the first check.
    pub eager_threshold: usize,
    /// Seconds; a measured runtime above this marks the file sleepy.
    pub slow_threshold: f64,
}

impl Default for SmellConfig {
    fn default() -> Self {
        SmellConfig { eager_threshold: 3, slow_threshold: 5.0 }
    }
}

/// Production functions and classes by unqualified name.
#[derive(Debug, Clone, Default)]
pub struct SymbolIndex {
    pub functions: BTreeMap<String, (PathBuf, usize)>,
    pub classes: BTreeSet<String>,
}

impl SymbolIndex {
    pub fn build<'a>(files: impl IntoIterator<Item = (&'a Path, &'a str)>) -> Self {
        let mut idx = SymbolIndex::default();
        let mut declared: Vec<(String, PathBuf)> = Vec::new();
        for (path, src) in files {
            let (funcs, classes, decls) = cxx::declarations(&cxx::tokenize(src));
            for f in funcs {
                idx.functions.insert(f.name, (path.to_path_buf(), f.start_line));
            }
            idx.classes.extend(classes);
            declared.extend(decls.into_iter().map(|d| (d, path.to_path_buf())));
        }
        for (name, path) in declared {
            idx.functions.entry(name).or_insert((path, 0));
        }
        idx
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name) || self.classes.contains(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Block,
    If,
    Loop,
    Switch,
    Try,
    Simple,
}

#[derive(Debug, Clone)]
struct Stmt {
    kind: Kind,
    first: usize,
    last: usize,
    cond: Option<(usize, usize)>,
    body: Vec<Stmt>,
    alt: Vec<Stmt>,
}

fn close_of(code: &[Token<'_>], open: usize) -> usize {
    cxx::matching_close(code, open).unwrap_or(code.len() - 1)
}

fn parse_seq(code: &[Token<'_>], mut k: usize, hi: usize) -> Vec<Stmt> {
    let mut out = Vec::new();
    while k < hi {
        if code[k].is(";") || code[k].is("}") || code[k].is_ident("else") {
            k += 1;
            continue;
        }
        let (s, next) = parse_stmt(code, k, hi);
        out.push(s);
        k = next.max(k + 1);
    }
    out
}

fn parse_stmt(code: &[Token<'_>], k: usize, hi: usize) -> (Stmt, usize) {
    let leaf = |kind, first, last| Stmt { kind, first, last, cond: None, body: Vec::new(), alt: Vec::new() };
    let t = code[k];
    if t.is("{") {
        let c = close_of(code, k).min(hi);
        let mut s = leaf(Kind::Block, k, c);
        s.body = parse_seq(code, k + 1, c);
        return (s, c + 1);
    }
    if t.is_ident("case") || t.is_ident("default") {
        let colon = (k..hi).find(|&j| code[j].is(":")).unwrap_or(hi - 1);
        return (leaf(Kind::Simple, k, colon), colon + 1);
    }
    let paren_after = |j: usize| (j < hi && code[j].is("(")).then(|| close_of(code, j));
    if t.is_ident("if") {
        let p = if code.get(k + 1).is_some_and(|x| x.is_ident("constexpr")) { k + 2 } else { k + 1 };
        if let Some(c) = paren_after(p) {
            let (then, mut next) = parse_stmt_or_empty(code, c + 1, hi);
            let mut s = leaf(Kind::If, k, then.as_ref().map_or(c, |x| x.last));
            s.cond = Some((p + 1, c));
            s.body = then.into_iter().collect();
            if next < hi && code[next].is_ident("else") {
                let (alt, n2) = parse_stmt_or_empty(code, next + 1, hi);
                if let Some(a) = alt {
                    s.last = a.last;
                    s.alt = vec![a];
                }
                next = n2;
            }
            return (s, next);
        }
    }
    if t.is_ident("for") || t.is_ident("while") || t.is_ident("switch") {
        if let Some(c) = paren_after(k + 1) {
            let (body, next) = parse_stmt_or_empty(code, c + 1, hi);
            let kind = if t.is_ident("switch") { Kind::Switch } else { Kind::Loop };
            let mut s = leaf(kind, k, body.as_ref().map_or(c, |b| b.last));
            s.cond = Some((k + 2, c));
            s.body = body.into_iter().collect();
            return (s, next);
        }
    }
    if t.is_ident("do") {
        let (body, next) = parse_stmt_or_empty(code, k + 1, hi);
        let end = (next..hi).find(|&j| code[j].is(";")).unwrap_or(hi.saturating_sub(1));
        let mut s = leaf(Kind::Loop, k, end);
        s.body = body.into_iter().collect();
        return (s, end + 1);
    }
    if t.is_ident("try") && k + 1 < hi && code[k + 1].is("{") {
        let (body, mut next) = parse_stmt(code, k + 1, hi);
        let mut s = leaf(Kind::Try, k, body.last);
        s.body = vec![body];
        while next < hi && code[next].is_ident("catch") {
            let Some(c) = paren_after(next + 1) else { break };
            if c + 1 >= hi || !code[c + 1].is("{") {
                break;
            }
            let (h, n2) = parse_stmt(code, c + 1, hi);
            s.last = h.last;
            s.alt.push(h);
            next = n2;
        }
        return (s, next);
    }
    let mut depth = 0i64;
    let mut j = k;
    while j < hi {
        match code[j].text {
            "(" | "[" | "{" if code[j].kind == TokenKind::Punct => depth += 1,
            ")" | "]" | "}" if code[j].kind == TokenKind::Punct => {
                depth -= 1;
                if depth < 0 {
                    return (leaf(Kind::Simple, k, j.saturating_sub(1).max(k)), j);
                }
            }
            ";" if depth == 0 => return (leaf(Kind::Simple, k, j), j + 1),
            _ => {}
        }
        j += 1;
    }
    (leaf(Kind::Simple, k, hi.saturating_sub(1).max(k)), hi)
}

fn parse_stmt_or_empty(code: &[Token<'_>], k: usize, hi: usize) -> (Option<Stmt>, usize) {
    if k >= hi {
        return (None, hi);
    }
    if code[k].is(";") {
        return (None, k + 1);
    }
    let (s, n) = parse_stmt(code, k, hi);
    (Some(s), n)
}

const ASSERT_PREFIXES: &[&str] = &[
    "EXPECT_",
    "ASSERT_",
    "CHECK_",
    "REQUIRE_",
    "CPPUNIT_ASSERT",
    "BOOST_CHECK",
    "BOOST_REQUIRE",
    "BOOST_TEST",
    "DOCTEST_CHECK",
    "DOCTEST_REQUIRE",
];

fn is_assert_macro(name: &str) -> bool {
    matches!(name, "assert" | "CHECK" | "REQUIRE" | "CHECK_FALSE" | "REQUIRE_FALSE") || ASSERT_PREFIXES.iter().any(|p| name.starts_with(p))
}

fn is_eq_macro(name: &str) -> bool {
    let n = name.trim_end_matches("_MESSAGE");
    n.ends_with("_EQ") || n.ends_with("_NE") || n.ends_with("_EQUAL") || n.ends_with("_NE_EQUAL")
}

const PRINT_FUNCS: &[&str] = &["printf", "fprintf", "puts", "fputs", "perror"];
const STREAMS: &[&str] = &["cout", "cerr", "clog"];
const SLEEP_FUNCS: &[&str] = &["sleep", "usleep", "nanosleep", "sleep_for", "sleep_until", "Sleep"];

fn outcome_word() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)success|fail|pass|error|wrong|mismatch|\bok\b").unwrap())
}

fn fail_counter() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(n_?|num_?)?(fail|err|bad|wrong|mismatch)").unwrap())
}

fn pass_flag() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(all_?)?(ok|pass|passed|success|correct|valid)\w*$").unwrap())
}

fn error_code_ident() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(rc|ret|retval|err|error|errno|ierr|status|code|result_code|MPI_SUCCESS)$").unwrap())
}

fn banner() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(//+|/\*+)\s*(test|case|check)\s*(case\s*)?#?\s*\d+").unwrap())
}

/// One assertion or output check.
#[derive(Debug, Clone)]
struct Check {
    first: usize,
    last: usize,
    line: usize,
    /// Tokens of the checked expression.
    expr: (usize, usize),
    macro_name: Option<String>,
    has_message: bool,
    guarded: bool,
    /// Enclosing try/catch statement or error-code `if`, by token index.
    handler: Option<usize>,
}

struct Ctx {
    guards: Vec<usize>,
    handler: Option<usize>,
}

struct Analysis<'a> {
    code: Vec<Token<'a>>,
    comment_lines: HashSet<usize>,
    lines: Vec<&'a str>,
    float_vars: HashSet<&'a str>,
}

impl<'a> Analysis<'a> {
    fn text(&self, a: usize, b: usize) -> String {
        self.code[a..=b].iter().map(|t| t.text).collect::<Vec<_>>().join(" ")
    }

    fn is_print_stmt(&self, s: &Stmt) -> bool {
        if s.kind != Kind::Simple {
            return false;
        }
        let toks = &self.code[s.first..=s.last];
        let head = toks.iter().position(|t| t.kind == TokenKind::Ident && !t.is_ident("std"));
        match head {
            Some(h) => {
                let t = toks[h];
                (PRINT_FUNCS.contains(&t.text) && toks.get(h + 1).is_some_and(|n| n.is("(")))
                    || (STREAMS.contains(&t.text) && toks.get(h + 1).is_some_and(|n| n.is("<<")))
            }
            None => false,
        }
    }

    fn has_string_with(&self, s: &Stmt, re: &Regex) -> bool {
        self.code[s.first..=s.last].iter().any(|t| t.kind == TokenKind::Str && re.is_match(t.text))
    }

    /// A statement that reports a test outcome.
    fn reports_outcome(&self, s: &Stmt) -> bool {
        match s.kind {
            Kind::Block => s.body.iter().any(|c| self.reports_outcome(c)),
            Kind::Simple => {
                let toks = &self.code[s.first..=s.last];
                if self.is_print_stmt(s) && self.has_string_with(s, outcome_word()) {
                    return true;
                }
                let first = toks[0];
                if first.is_ident("return") {
                    return toks.get(1).is_some_and(|t| {
                        (t.kind == TokenKind::Number && t.text != "0") || t.is("-") || t.is_ident("EXIT_FAILURE") || t.is_ident("false")
                    });
                }
                if first.is_ident("throw") {
                    return true;
                }
                let idents: Vec<&str> = toks.iter().filter(|t| t.kind == TokenKind::Ident).map(|t| t.text).collect();
                if idents.iter().any(|n| matches!(*n, "exit" | "abort" | "MPI_Abort")) {
                    return true;
                }
                let incr = toks.iter().any(|t| t.is("++") || t.is("+="));
                if incr && idents.first().is_some_and(|n| fail_counter().is_match(n)) {
                    return true;
                }
                toks.len() >= 3
                    && toks[0].kind == TokenKind::Ident
                    && pass_flag().is_match(toks[0].text)
                    && toks[1].is("=")
                    && (toks[2].is_ident("false") || toks[2].text == "0")
            }
            _ => false,
        }
    }

    fn branch_prints_message(&self, s: &Stmt) -> bool {
        match s.kind {
            Kind::Block => s.body.iter().any(|c| self.branch_prints_message(c)),
            Kind::Simple => {
                (self.is_print_stmt(s) || self.code[s.first].is_ident("throw"))
                    && self.code[s.first..=s.last].iter().any(|t| t.kind == TokenKind::Str)
            }
            _ => false,
        }
    }

    fn is_error_code_cond(&self, (a, b): (usize, usize)) -> bool {
        self.code[a..b].iter().any(|t| t.kind == TokenKind::Ident && error_code_ident().is_match(t.text))
    }

    fn collect_checks(&self, stmts: &[Stmt], ctx: &mut Ctx, out: &mut Vec<Check>) {
        for s in stmts {
            self.collect_check(s, ctx, out);
        }
    }

    fn collect_check(&self, s: &Stmt, ctx: &mut Ctx, out: &mut Vec<Check>) {
        let guarded = !ctx.guards.is_empty();
        match s.kind {
            Kind::Simple => {
                if let Some(c) = self.macro_check(s, guarded, ctx.handler) {
                    out.push(c);
                } else if let Some(c) = self.ternary_check(s, guarded, ctx.handler) {
                    out.push(c);
                }
            }
            Kind::If => {
                let cond = s.cond.expect("if has a condition");
                let is_check = s.body.iter().chain(&s.alt).any(|b| self.reports_outcome(b));
                let error_branch = self.is_error_code_cond(cond);
                if is_check {
                    out.push(Check {
                        first: s.first,
                        last: s.last,
                        line: self.code[s.first].line,
                        expr: (cond.0, cond.1.saturating_sub(1)),
                        macro_name: None,
                        has_message: s.body.iter().chain(&s.alt).any(|b| self.branch_prints_message(b)),
                        guarded,
                        handler: if error_branch { Some(s.first) } else { ctx.handler },
                    });
                    let saved = ctx.handler;
                    if error_branch {
                        ctx.handler = Some(s.first);
                    }
                    self.collect_checks(&s.body, ctx, out);
                    self.collect_checks(&s.alt, ctx, out);
                    ctx.handler = saved;
                } else {
                    let saved = ctx.handler;
                    if error_branch {
                        ctx.handler = Some(s.first);
                    }
                    ctx.guards.push(s.first);
                    self.collect_checks(&s.body, ctx, out);
                    self.collect_checks(&s.alt, ctx, out);
                    ctx.guards.pop();
                    ctx.handler = saved;
                }
            }
            Kind::Loop | Kind::Switch => {
                ctx.guards.push(s.first);
                self.collect_checks(&s.body, ctx, out);
                ctx.guards.pop();
            }
            Kind::Try => {
                let saved = ctx.handler;
                ctx.handler = Some(s.first);
                self.collect_checks(&s.body, ctx, out);
                self.collect_checks(&s.alt, ctx, out);
                ctx.handler = saved;
            }
            Kind::Block => self.collect_checks(&s.body, ctx, out),
        }
    }

    fn macro_check(&self, s: &Stmt, guarded: bool, handler: Option<usize>) -> Option<Check> {
        let mut h = s.first;
        while h + 1 <= s.last && self.code[h].is_ident("std") && self.code[h + 1].is("::") {
            h += 2;
        }
        let t = self.code[h];
        if t.kind != TokenKind::Ident || !is_assert_macro(t.text) || !self.code.get(h + 1).is_some_and(|x| x.is("(")) {
            return None;
        }
        let close = close_of(&self.code, h + 1);
        let args = &self.code[h + 2..close];
        let after = &self.code[close + 1..=s.last.max(close)];
        let has_message = t.text.ends_with("_MESSAGE")
            || t.text.ends_with("_MSG")
            || after.iter().any(|x| x.is("<<"))
            || args.windows(2).any(|w| (w[0].is("&&") && w[1].kind == TokenKind::Str) || (w[0].kind == TokenKind::Str && w[1].is("&&")));
        Some(Check {
            first: s.first,
            last: s.last,
            line: self.code[s.first].line,
            expr: (h + 2, close.saturating_sub(1)),
            macro_name: Some(t.text.to_string()),
            has_message,
            guarded,
            handler,
        })
    }

    /// `return cond ? 0 : 1;`
    fn ternary_check(&self, s: &Stmt, guarded: bool, handler: Option<usize>) -> Option<Check> {
        if !self.code[s.first].is_ident("return") {
            return None;
        }
        let q = (s.first..=s.last).find(|&j| self.code[j].is("?"))?;
        Some(Check {
            first: s.first,
            last: s.last,
            line: self.code[s.first].line,
            expr: (s.first + 1, q - 1),
            macro_name: None,
            has_message: false,
            guarded,
            handler,
        })
    }

    /// Comment on the check's lines or the line just above.
    fn explained(&self, c: &Check) -> bool {
        let (a, b) = (self.code[c.first].line, self.code[c.last].end_line());
        (a.saturating_sub(1)..=b).any(|l| self.comment_lines.contains(&l))
    }

    fn expr_tokens(&self, c: &Check) -> &[Token<'a>] {
        if c.expr.1 < c.expr.0 {
            return &[];
        }
        &self.code[c.expr.0..=c.expr.1]
    }

    /// Canonical form of what a check asserts.
    fn normalized_expr(&self, c: &Check) -> String {
        let toks = self.expr_tokens(c);
        let mut parts: Vec<Vec<&str>> = vec![Vec::new()];
        let mut depth = 0;
        for t in toks {
            match t.text {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => {
                    parts.push(Vec::new());
                    continue;
                }
                _ => {}
            }
            parts.last_mut().unwrap().push(t.text);
        }
        let name = c.macro_name.as_deref().unwrap_or("");
        let base = name.trim_end_matches("_MESSAGE");
        let join = |v: &Vec<&str>| v.join(" ");
        let strip_msg = |s: String| s.split(" && \"").next().unwrap_or(&s).to_string();
        if is_eq_macro(name) && parts.len() >= 2 {
            let (a, b) = if name.ends_with("_MESSAGE") && parts.len() >= 3 { (&parts[1], &parts[2]) } else { (&parts[0], &parts[1]) };
            let op = if base.ends_with("_NE") { "!=" } else { "==" };
            return format!("{} {op} {}", join(a), join(b));
        }
        let main = if name.ends_with("_MESSAGE") && parts.len() >= 2 && parts[0].iter().all(|t| t.starts_with('"')) {
            join(&parts[1])
        } else {
            join(&parts[0])
        };
        let main = strip_msg(main);
        if base.ends_with("_FALSE") {
            format!("! ( {main} )")
        } else {
            main
        }
    }

    fn is_float_literal(t: &Token<'_>) -> bool {
        t.kind == TokenKind::Number
            && !t.text.starts_with("0x")
            && !t.text.starts_with("0X")
            && (t.text.contains('.') || t.text.contains(['e', 'E']) || t.text.ends_with(['f', 'F']))
    }

    fn floaty(&self, toks: &[Token<'_>]) -> bool {
        toks.iter().enumerate().any(|(i, t)| {
            Self::is_float_literal(t)
                || (t.kind == TokenKind::Ident && self.float_vars.contains(t.text) && !toks.get(i + 1).is_some_and(|n| n.is("(")))
                || t.is_ident("to_string")
                || (t.is_ident("str") && i > 0 && toks[i - 1].is("."))
        })
    }

    /// `==`/`!=` (or an equality macro) with a floating-point or
    /// stringified operand.
    fn sensitive_equality(&self, c: &Check) -> bool {
        let toks = self.expr_tokens(c);
        let name = c.macro_name.as_deref().unwrap_or("");
        if is_eq_macro(name) {
            let parts = split_top(toks, ",");
            let skip = usize::from(name.ends_with("_MESSAGE") && parts.first().is_some_and(|p| p.iter().all(|t| t.kind == TokenKind::Str)));
            return parts.iter().skip(skip).take(2).any(|p| self.floaty(p));
        }
        for (i, t) in toks.iter().enumerate() {
            if !(t.is("==") || t.is("!=")) {
                continue;
            }
            let (l, r) = operand_bounds(toks, i);
            if self.floaty(&toks[l..i]) || self.floaty(&toks[i + 1..r]) {
                return true;
            }
        }
        false
    }

    fn magic_number(&self, c: &Check) -> bool {
        if self.explained(c) {
            return false;
        }
        self.expr_tokens(c).iter().any(|t| t.kind == TokenKind::Number && !is_zero_or_one(t.text))
    }

    fn line_text(&self, line: usize) -> String {
        self.lines.get(line.saturating_sub(1)).map(|l| l.trim().to_string()).unwrap_or_default()
    }
}

fn split_top<'t, 'a>(toks: &'t [Token<'a>], sep: &str) -> Vec<&'t [Token<'a>]> {
    let mut out = Vec::new();
    let mut depth = 0i64;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "(" | "[" | "{" if t.kind == TokenKind::Punct => depth += 1,
            ")" | "]" | "}" if t.kind == TokenKind::Punct => depth -= 1,
            _ if depth == 0 && t.is(sep) => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&toks[start..]);
    out
}

/// Extent of the operands around the binary operator at `op`: up to the
/// nearest logical operator, comma or unbalanced bracket.
fn operand_bounds(toks: &[Token<'_>], op: usize) -> (usize, usize) {
    let stop = |t: &Token<'_>| t.is("&&") || t.is("||") || t.is(",") || t.is("?") || t.is(":");
    let mut depth = 0i64;
    let mut l = op;
    while l > 0 {
        let t = &toks[l - 1];
        if t.is(")") || t.is("]") {
            depth += 1;
        } else if t.is("(") || t.is("[") {
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else if depth == 0 && stop(t) {
            break;
        }
        l -= 1;
    }
    depth = 0;
    let mut r = op + 1;
    while r < toks.len() {
        let t = &toks[r];
        if t.is("(") || t.is("[") {
            depth += 1;
        } else if t.is(")") || t.is("]") {
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else if depth == 0 && stop(t) {
            break;
        }
        r += 1;
    }
    (l, r)
}

fn is_zero_or_one(lit: &str) -> bool {
    let s = lit.replace('\'', "");
    let s = s.trim_end_matches(['u', 'U', 'l', 'L', 'f', 'F']);
    if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        return matches!(u64::from_str_radix(h, 16), Ok(0 | 1));
    }
    matches!(s.parse::<f64>(), Ok(v) if v == 0.0 || v == 1.0)
}

fn collect_float_vars<'a>(code: &[Token<'a>]) -> HashSet<&'a str> {
    let mut out = HashSet::new();
    for i in 0..code.len() {
        let t = code[i];
        let floaty = t.is_ident("float")
            || t.is_ident("double")
            || (t.is(">") && i > 0 && (code[i - 1].is_ident("double") || code[i - 1].is_ident("float")));
        if !floaty {
            continue;
        }
        let mut j = i + 1;
        while j < code.len() && (code[j].is("*") || code[j].is("&") || code[j].is(">") || code[j].is_ident("const")) {
            j += 1;
        }
        if let (Some(n), Some(after)) = (code.get(j), code.get(j + 1)) {
            if n.kind == TokenKind::Ident && ["=", ";", ",", "[", "{", "("].iter().any(|p| after.is(p)) {
                // a call like `double f(...)` declares a function, not a variable
                if after.is("(")
                    && i > 0
                    && (code[i - 1].is("{") || code[i - 1].is(";") || code[i - 1].is("}"))
                    && code.get(j + 2).is_some_and(|x| {
                        x.kind == TokenKind::Ident
                            && (x.is_ident("double") || x.is_ident("float") || x.is_ident("int") || x.is_ident("const"))
                    })
                {
                    continue;
                }
                out.insert(n.text);
            }
        }
    }
    out
}

/// A test block: a span of statements checked as one test.
#[derive(Debug)]
struct Block {
    start_line: usize,
    stmts: Vec<Stmt>,
    disabled: bool,
    /// Token index of the registration macro, for disabled tests.
    head: Option<usize>,
}

fn is_success_marker(a: &Analysis<'_>, s: &Stmt) -> bool {
    a.code[s.first..=s.last].iter().any(|t| t.kind == TokenKind::Str && t.text.contains("completed successfully"))
}

fn macro_disabled(a: &Analysis<'_>, head_args: (usize, usize), body: &[Stmt]) -> bool {
    let args = &a.code[head_args.0..=head_args.1.max(head_args.0)];
    let by_name = args.iter().any(|t| {
        (t.kind == TokenKind::Ident && t.text.starts_with("DISABLED_"))
            || (t.kind == TokenKind::Str && (t.text.contains("[.") || t.text.contains("[!hide]")))
            || t.is_ident("skip")
            || t.is_ident("disabled")
    });
    let skipped = body.first().is_some_and(|s| s.kind == Kind::Simple && matches!(a.code[s.first].text, "GTEST_SKIP" | "SKIP"));
    by_name || skipped
}

/// Detects smells in one test file.
pub fn detect(file: &Path, src: &str, index: &SymbolIndex, cfg: &SmellConfig) -> Result<Vec<SmellFinding>, SmellError> {
    let tokens = cxx::tokenize(src);
    cxx::check_braces(&tokens).map_err(|e| SmellError::LexFailure { file: file.display().to_string(), message: e.to_string() })?;
    let dead = inactive_ranges(&tokens);
    let tokens: Vec<Token> = tokens.into_iter().filter(|t| !dead.iter().any(|&(a, b)| t.offset > a && t.offset < b)).collect();
    let code: Vec<Token> = tokens.iter().copied().filter(Token::is_code).collect();
    let mut comment_lines = HashSet::new();
    for t in tokens.iter().filter(|t| t.is_comment()) {
        comment_lines.extend(t.line..=t.end_line());
    }
    let a = Analysis { float_vars: collect_float_vars(&code), code, comment_lines, lines: src.lines().collect() };
    let code_pos: HashMap<usize, usize> = a.code.iter().enumerate().map(|(i, t)| (t.offset, i)).collect();
    let (funcs, _, _) = cxx::declarations(&tokens);
    let local: HashSet<&str> = funcs.iter().map(|f| f.name.as_str()).filter(|n| !cxx::TEST_MACROS.contains(n)).collect();
    let is_prod = |n: &str| index.contains(n) && !local.contains(n);

    // function bodies as statement lists
    let mut fns: Vec<Func> = Vec::new();
    for f in &funcs {
        let open = code_pos[&tokens[f.open].offset];
        let close = code_pos[&tokens[f.close].offset];
        fns.push(Func { name: &f.name, line: f.start_line, open, close, stmts: parse_seq(&a.code, open + 1, close) });
    }

    let mut blocks: Vec<Block> = Vec::new();
    let macro_fns: Vec<usize> = (0..fns.len()).filter(|&i| cxx::TEST_MACROS.contains(&fns[i].name)).collect();
    let test_fns: Vec<usize> =
        (0..fns.len()).filter(|&i| fns[i].name != "main" && fns[i].name.to_ascii_lowercase().starts_with("test")).collect();
    if !macro_fns.is_empty() {
        for &i in &macro_fns {
            let f = &fns[i];
            let head = (f.open.saturating_sub(1)..f.open).rev().next().unwrap_or(0);
            let lp = (0..f.open).rev().find(|&j| a.code[j].is_ident(f.name)).map(|j| j + 1).unwrap_or(head);
            let rp = close_of(&a.code, lp);
            let disabled = macro_disabled(&a, (lp + 1, rp.saturating_sub(1)), &f.stmts);
            blocks.push(Block { start_line: f.line, stmts: f.stmts.clone(), disabled, head: Some(lp - 1) });
        }
    } else if !test_fns.is_empty() {
        for &i in &test_fns {
            blocks.push(Block { start_line: fns[i].line, stmts: fns[i].stmts.clone(), disabled: false, head: None });
        }
    } else if let Some(mi) = fns.iter().position(|f| f.name == "main") {
        blocks.extend(split_main(&a, &tokens, &fns[mi]));
    }

    let mut findings: Vec<(SmellKind, usize)> = Vec::new();
    let mut calls_by_block: Vec<Vec<(String, usize)>> = Vec::new();

    for b in &blocks {
        let mut checks = Vec::new();
        a.collect_checks(&b.stmts, &mut Ctx { guards: Vec::new(), handler: None }, &mut checks);
        let span = b.stmts.first().map(|s| (s.first, b.stmts.last().unwrap().last));
        let calls: Vec<(String, usize)> = match span {
            Some((x, y)) => prod_calls(&a.code[x..=y], x, &is_prod),
            None => Vec::new(),
        };
        calls_by_block.push(calls.iter().map(|(n, i)| (n.clone(), *i)).collect());

        if b.disabled {
            findings.push((SmellKind::It, a.code[b.head.unwrap_or(0)].line));
        }
        if checks.is_empty() {
            findings.push((SmellKind::Em, b.start_line));
            continue;
        }
        let unexplained: Vec<&Check> = checks.iter().filter(|c| !c.has_message && !a.explained(c)).collect();
        if unexplained.len() >= 2 {
            findings.push((SmellKind::Ar, unexplained[0].line));
        }
        for c in &checks {
            if c.guarded {
                findings.push((SmellKind::Clt, c.line));
            }
            if a.sensitive_equality(c) {
                findings.push((SmellKind::Se, c.line));
            }
            if a.magic_number(c) {
                findings.push((SmellKind::Mnt, c.line));
            }
        }
        if checks.iter().all(|c| c.handler.is_some()) {
            findings.push((SmellKind::Eh, a.code[checks[0].handler.unwrap()].line));
        }
        let mut seen: HashSet<String> = HashSet::new();
        for c in &checks {
            if !seen.insert(a.normalized_expr(c)) {
                findings.push((SmellKind::Ra, c.line));
            }
        }
        let first_check = checks[0].first;
        let mut before: Vec<&str> = Vec::new();
        for (n, i) in &calls {
            if *i < first_check && !before.contains(&n.as_str()) {
                before.push(n);
                if before.len() == cfg.eager_threshold + 1 {
                    findings.push((SmellKind::Ea, a.code[*i].line));
                }
            }
        }
        if calls.is_empty() && !reaches_production(&a, &fns, &b.stmts, &is_prod) {
            findings.push((SmellKind::Ut, b.start_line));
        }
        let all_ctor = checks.iter().all(|c| {
            let toks = a.expr_tokens(c);
            let ctor = toks.iter().enumerate().any(|(i, t)| {
                t.kind == TokenKind::Ident
                    && index.classes.contains(t.text)
                    && (toks.get(i + 1).is_some_and(|n| n.is("(") || n.is("{"))
                        || (toks.get(i + 1).is_some_and(|n| n.kind == TokenKind::Ident)
                            && toks.get(i + 2).is_some_and(|n| n.is("(") || n.is("{"))))
            });
            let func = toks.windows(2).any(|w| {
                w[0].kind == TokenKind::Ident
                    && w[1].is("(")
                    && index.functions.contains_key(w[0].text)
                    && !index.classes.contains(w[0].text)
            });
            ctor && !func
        });
        if all_ctor {
            findings.push((SmellKind::Ci, checks[0].line));
        }
    }

    // same production function in several blocks
    let mut users: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (bi, calls) in calls_by_block.iter().enumerate() {
        for (n, _) in calls {
            users.entry(n.as_str()).or_default().insert(bi);
        }
    }
    let mut lazy: BTreeSet<usize> = BTreeSet::new();
    for set in users.values().filter(|s| s.len() >= 2) {
        lazy.extend(set);
    }
    for bi in lazy {
        findings.push((SmellKind::Lt, blocks[bi].start_line));
    }

    // duplicate assertion text within one function
    for f in &fns {
        let mut checks = Vec::new();
        a.collect_checks(&f.stmts, &mut Ctx { guards: Vec::new(), handler: None }, &mut checks);
        let mut seen: HashSet<String> = HashSet::new();
        for c in &checks {
            if !seen.insert(a.text(c.first, c.last)) {
                findings.push((SmellKind::Da, c.line));
            }
        }
    }

    // repeated print statements anywhere in the file
    let mut prints: HashSet<String> = HashSet::new();
    for f in &fns {
        visit(&f.stmts, &mut |s| {
            if a.is_print_stmt(s) && !prints.insert(a.text(s.first, s.last)) {
                findings.push((SmellKind::Rp, a.code[s.first].line));
            }
        });
    }

    for w in a.code.windows(2) {
        if w[0].kind == TokenKind::Ident && SLEEP_FUNCS.contains(&w[0].text) && w[1].is("(") {
            findings.push((SmellKind::St, w[0].line));
        }
    }

    // ignored tests: commented-out calls, `#if 0`, uncalled test functions
    let test_names: HashSet<&str> = test_fns.iter().map(|&i| fns[i].name).collect();
    for t in tokens.iter() {
        match t.kind {
            TokenKind::LineComment | TokenKind::BlockComment => {
                let body = t.text.trim_start_matches('/').trim_start_matches('*').trim_end_matches("*/");
                for (k, l) in body.lines().enumerate() {
                    let l = l.trim().trim_start_matches('*').trim();
                    if !(l.ends_with(';') && l.contains('(')) {
                        continue;
                    }
                    let inner = cxx::tokenize(l);
                    if cxx::calls_in(&inner).iter().any(|(n, _)| is_prod(n) || test_names.contains(n)) {
                        findings.push((SmellKind::It, t.line + k));
                    }
                }
            }
            TokenKind::Directive if cxx::squash_ws(t.text.trim_start_matches('#')) == "if 0" => findings.push((SmellKind::It, t.line)),
            _ => {}
        }
    }
    if let Some(mi) = fns.iter().position(|f| f.name == "main") {
        let main_calls: HashSet<&str> = cxx::calls_in(&a.code[fns[mi].open..=fns[mi].close]).into_iter().map(|(n, _)| n).collect();
        if test_fns.iter().any(|&i| main_calls.contains(fns[i].name)) {
            for &i in &test_fns {
                if !main_calls.contains(fns[i].name) {
                    findings.push((SmellKind::It, fns[i].line));
                }
            }
        }
    }

    let mut out: Vec<SmellFinding> = findings
        .into_iter()
        .map(|(kind, line)| SmellFinding {
            file: file.to_path_buf(),
            line,
            kind,
            evidence: a.line_text(line),
            rule_version: RULE_VERSION.into(),
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// A check's position and the byte range of the expression it checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSite {
    pub line: usize,
    /// Function containing the check.
    pub function: String,
    /// Byte range of the whole check statement.
    pub stmt: (usize, usize),
    /// Byte range of the checked expression; empty for `assert()`.
    pub expr: (usize, usize),
    pub macro_name: Option<String>,
}

/// Every check in every function body of a test file, in source order.
/// Code under `#if 0` is skipped.
pub fn check_sites(file: &Path, src: &str) -> Result<Vec<CheckSite>, SmellError> {
    let tokens = cxx::tokenize(src);
    cxx::check_braces(&tokens).map_err(|e| SmellError::LexFailure { file: file.display().to_string(), message: e.to_string() })?;
    let dead = inactive_ranges(&tokens);
    let tokens: Vec<Token> = tokens.into_iter().filter(|t| !dead.iter().any(|&(a, b)| t.offset > a && t.offset < b)).collect();
    let code: Vec<Token> = tokens.iter().copied().filter(Token::is_code).collect();
    let a = Analysis { float_vars: HashSet::new(), code, comment_lines: HashSet::new(), lines: Vec::new() };
    let code_pos: HashMap<usize, usize> = a.code.iter().enumerate().map(|(i, t)| (t.offset, i)).collect();
    let (funcs, _, _) = cxx::declarations(&tokens);
    let mut out = Vec::new();
    for f in &funcs {
        let open = code_pos[&tokens[f.open].offset];
        let close = code_pos[&tokens[f.close].offset];
        let stmts = parse_seq(&a.code, open + 1, close);
        let mut checks = Vec::new();
        a.collect_checks(&stmts, &mut Ctx { guards: Vec::new(), handler: None }, &mut checks);
        for c in checks {
            let expr = if c.expr.1 < c.expr.0 {
                let at = a.code[c.expr.0.min(c.last)].offset;
                (at, at)
            } else {
                (a.code[c.expr.0].offset, a.code[c.expr.1].end())
            };
            out.push(CheckSite {
                line: c.line,
                function: f.name.clone(),
                stmt: (a.code[c.first].offset, a.code[c.last].end()),
                expr,
                macro_name: c.macro_name,
            });
        }
    }
    out.sort_by_key(|c| c.stmt);
    Ok(out)
}

/// Byte ranges disabled by `#if 0`, directives excluded.
pub(crate) fn inactive_ranges(tokens: &[Token<'_>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut stack: Vec<Option<usize>> = Vec::new();
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Directive) {
        let d = cxx::squash_ws(t.text.trim_start_matches('#'));
        let word = d.split([' ', '(']).next().unwrap_or("");
        match word {
            "if" | "ifdef" | "ifndef" => stack.push((d == "if 0").then_some(t.offset)),
            "else" | "elif" => {
                if let Some(Some(start)) = stack.pop() {
                    out.push((start, t.offset));
                }
                stack.push(None);
            }
            "endif" => {
                if let Some(Some(start)) = stack.pop() {
                    out.push((start, t.offset));
                }
            }
            _ => {}
        }
    }
    out
}

/// Adds a sleepy-test finding when a measured runtime exceeds the threshold.
pub fn slow_run_finding(file: &Path, src: &str, runtime_secs: f64, cfg: &SmellConfig) -> Option<SmellFinding> {
    (runtime_secs > cfg.slow_threshold).then(|| SmellFinding {
        file: file.to_path_buf(),
        line: 1,
        kind: SmellKind::St,
        evidence: src.lines().next().unwrap_or("").trim().to_string(),
        rule_version: RULE_VERSION.into(),
    })
}

fn visit(stmts: &[Stmt], f: &mut impl FnMut(&Stmt)) {
    for s in stmts {
        f(s);
        visit(&s.body, f);
        visit(&s.alt, f);
    }
}

fn prod_calls(toks: &[Token<'_>], base: usize, is_prod: &impl Fn(&str) -> bool) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (i, w) in toks.windows(2).enumerate() {
        let ctor_new = i > 0 && toks[i - 1].is_ident("new");
        let named = w[1].kind == TokenKind::Ident && toks.get(i + 2).is_some_and(|n| n.is("(") || n.is("{"));
        if w[0].kind == TokenKind::Ident && (w[1].is("(") || w[1].is("{") || ctor_new || named) && is_prod(w[0].text) {
            out.push((w[0].text.to_string(), base + i));
        }
    }
    out
}

/// Whether the statements reach production code through local helpers.
fn reaches_production(a: &Analysis<'_>, fns: &[impl FnName], stmts: &[Stmt], is_prod: &impl Fn(&str) -> bool) -> bool {
    let Some((x, y)) = stmts.first().map(|s| (s.first, stmts.last().unwrap().last)) else { return false };
    let mut todo: Vec<(usize, usize)> = vec![(x, y)];
    let mut seen: HashSet<usize> = HashSet::new();
    while let Some((x, y)) = todo.pop() {
        for (name, _) in cxx::calls_in(&a.code[x..=y]) {
            if is_prod(name) {
                return true;
            }
            if let Some(i) = fns.iter().position(|f| f.fn_name() == name) {
                if seen.insert(i) {
                    let (o, c) = fns[i].span();
                    todo.push((o, c));
                }
            }
        }
    }
    false
}

trait FnName {
    fn fn_name(&self) -> &str;
    fn span(&self) -> (usize, usize);
}

impl FnName for Func<'_> {
    fn fn_name(&self) -> &str {
        self.name
    }
    fn span(&self) -> (usize, usize) {
        (self.open, self.close)
    }
}

struct Func<'f> {
    name: &'f str,
    line: usize,
    open: usize,
    close: usize,
    stmts: Vec<Stmt>,
}

/// Splits `main` into test blocks at numbered banner comments and after
/// success-print checks.
fn split_main(a: &Analysis<'_>, tokens: &[Token<'_>], f: &Func<'_>) -> Vec<Block> {
    let (lo, hi) = (a.code[f.open].offset, a.code[f.close].offset);
    let depth_at = |off: usize| {
        a.code.iter().filter(|t| t.offset > lo && t.offset < off).fold(0i64, |d, t| {
            if t.is("{") {
                d + 1
            } else if t.is("}") {
                d - 1
            } else {
                d
            }
        })
    };
    let banners: Vec<(usize, usize)> = tokens
        .iter()
        .filter(|t| t.is_comment() && t.offset > lo && t.offset < hi && banner().is_match(t.text))
        .filter(|t| depth_at(t.offset) == 0)
        .map(|t| (t.offset, t.line))
        .collect();
    let has_checks = |stmts: &[Stmt]| {
        let mut v = Vec::new();
        a.collect_checks(stmts, &mut Ctx { guards: Vec::new(), handler: None }, &mut v);
        !v.is_empty()
    };
    let mut segs: Vec<(Option<usize>, Vec<Stmt>)> = vec![(None, Vec::new())];
    let mut bi = 0;
    for s in &f.stmts {
        let off = a.code[s.first].offset;
        while bi < banners.len() && banners[bi].0 < off {
            segs.push((Some(banners[bi].1), Vec::new()));
            bi += 1;
        }
        segs.last_mut().unwrap().1.push(s.clone());
        if is_success_marker(a, s) {
            segs.push((None, Vec::new()));
        }
    }
    for b in &banners[bi..] {
        segs.push((Some(b.1), Vec::new()));
    }
    // check-free statements after a marker belong to the previous block
    let mut merged: Vec<(Option<usize>, Vec<Stmt>)> = Vec::new();
    for (i, (banner_line, body)) in segs.into_iter().enumerate() {
        if i > 0 && banner_line.is_none() && !has_checks(&body) {
            if let Some(prev) = merged.last_mut() {
                prev.1.extend(body);
                continue;
            }
        }
        merged.push((banner_line, body));
    }
    // check-free statements before the first banner belong to the next block
    if merged.len() >= 2 && merged[0].0.is_none() && merged[1].0.is_some() && !has_checks(&merged[0].1) {
        let mut head = merged.remove(0).1;
        head.append(&mut merged[0].1);
        merged[0].1 = head;
    }
    merged
        .into_iter()
        .map(|(banner_line, body)| Block {
            start_line: banner_line.or_else(|| body.first().map(|s| a.code[s.first].line)).unwrap_or(f.line),
            stmts: body,
            disabled: false,
            head: None,
        })
        .collect()
}

/// Percentage of files with at least one finding, per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellDistribution {
    pub n_files: usize,
    pub per_kind: BTreeMap<SmellKind, f64>,
}

pub fn distribution<'a>(files: impl IntoIterator<Item = &'a [SmellFinding]>) -> SmellDistribution {
    let mut n = 0;
    let mut counts: BTreeMap<SmellKind, usize> = SmellKind::ALL.iter().map(|k| (*k, 0)).collect();
    for f in files {
        n += 1;
        let kinds: BTreeSet<SmellKind> = f.iter().map(|x| x.kind).collect();
        for k in kinds {
            *counts.get_mut(&k).unwrap() += 1;
        }
    }
    SmellDistribution {
        n_files: n,
        per_kind: counts.into_iter().map(|(k, c)| (k, if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 })).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx() -> SymbolIndex {
        let h = "namespace optim { double sumt(const double* x, int n); }\n";
        SymbolIndex::build([(Path::new("optim.hpp"), h)])
    }

    fn kinds(src: &str) -> Vec<(SmellKind, usize)> {
        detect(Path::new("t.cpp"), src, &idx(), &SmellConfig::default()).unwrap().into_iter().map(|f| (f.kind, f.line)).collect()
    }

    #[test]
    fn hard_coded_float_equality() {
        let k = kinds("int main() {\n  double result = optim::sumt(nullptr, 0);\n  assert(result == 3.14159);\n}\n");
        assert!(k.contains(&(SmellKind::Mnt, 3)) && k.contains(&(SmellKind::Se, 3)), "{k:?}");
    }

    #[test]
    fn empty_main() {
        assert_eq!(kinds("int main(){return 0;}"), vec![(SmellKind::Em, 1)]);
    }

    #[test]
    fn lazy_tests_share_production_call() {
        let src = "TEST(A, One) {\n  EXPECT_GE(optim::sumt(nullptr, 0), 0) << \"x\";\n}\nTEST(A, Two) {\n  EXPECT_GE(optim::sumt(nullptr, 0), 0) << \"y\";\n}\n";
        assert_eq!(kinds(src), vec![(SmellKind::Lt, 1), (SmellKind::Lt, 4)]);
    }

    #[test]
    fn unbalanced_file_is_a_lex_failure() {
        let e = detect(Path::new("t.cpp"), "int main() {", &idx(), &SmellConfig::default()).unwrap_err();
        assert!(matches!(e, SmellError::LexFailure { .. }));
    }

    #[test]
    fn distribution_arithmetic() {
        let f = |k| SmellFinding { file: "f".into(), line: 1, kind: k, evidence: "x".into(), rule_version: RULE_VERSION.into() };
        let mut files: Vec<Vec<SmellFinding>> = (0..8).map(|_| vec![f(SmellKind::Mnt)]).collect();
        files[0].push(f(SmellKind::Da));
        files[3].push(f(SmellKind::Da));
        files[3].push(f(SmellKind::Da));
        let d = distribution(files.iter().map(Vec::as_slice));
        assert_eq!(d.per_kind[&SmellKind::Mnt], 100.0);
        assert_eq!(d.per_kind[&SmellKind::Da], 25.0);
        assert_eq!(d.per_kind[&SmellKind::Rp], 0.0);
        let order: Vec<&str> = d.per_kind.keys().map(|k| k.code()).collect();
        assert_eq!(order, ["AR", "CLT", "CI", "EM", "EH", "RP", "RA", "SE", "ST", "EA", "LT", "DA", "UT", "IT", "MNT"]);
    }

    #[test]
    fn literal_exemptions() {
        for l in ["0", "1", "0.0", "1.0f", "1u", "0x1", "1'0"] {
            assert_eq!(is_zero_or_one(l), l != "1'0", "{l}");
        }
        assert!(!is_zero_or_one("2"));
    }
}
