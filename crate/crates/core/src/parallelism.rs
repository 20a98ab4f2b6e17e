//! Parallel-construct coverage of tests.
//!
//! The source side inventories OpenMP pragmas, their lexical nesting and the
//! MPI calls of every production function. The test side works out which of
//! those functions a test both calls and checks, using a small name-based
//! taint pass: a variable assigned from (or passed as an argument to) a
//! production call carries that call's name into any check that reads it.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxx::{self, Token, TokenKind};
use crate::smells;

#[derive(Debug, Error)]
pub enum ParallelismError {
    #[error("{file}: cannot lex: {message}")]
    LexFailure { file: String, message: String },
}

pub type Result<T> = std::result::Result<T, ParallelismError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Float,
    Double,
    ComplexDouble,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PragmaKind {
    Parallel,
    For,
    Simd,
    Sections,
    Single,
    Master,
    Critical,
    Atomic,
    Barrier,
    Task,
    Target,
    TargetData,
    Teams,
    Distribute,
    Reduction,
    Ordered,
    Flush,
}

/// Kinds named by one pragma, clauses included.
pub fn pragma_kinds(p: &cxx::OmpPragma) -> BTreeSet<PragmaKind> {
    let words = p.words();
    let mut out = BTreeSet::new();
    for (i, w) in words.iter().enumerate() {
        let kind = match *w {
            "parallel" => PragmaKind::Parallel,
            "for" | "loop" => PragmaKind::For,
            "simd" => PragmaKind::Simd,
            "sections" | "section" => PragmaKind::Sections,
            "single" => PragmaKind::Single,
            "master" | "masked" => PragmaKind::Master,
            "critical" => PragmaKind::Critical,
            "atomic" => PragmaKind::Atomic,
            "barrier" => PragmaKind::Barrier,
            "task" | "taskloop" | "taskwait" | "taskgroup" => PragmaKind::Task,
            "target" => {
                if matches!(words.get(i + 1), Some(&"data") | Some(&"update") | Some(&"enter") | Some(&"exit")) {
                    PragmaKind::TargetData
                } else {
                    PragmaKind::Target
                }
            }
            "map" => PragmaKind::TargetData,
            "teams" => PragmaKind::Teams,
            "distribute" => PragmaKind::Distribute,
            "reduction" => PragmaKind::Reduction,
            "ordered" => PragmaKind::Ordered,
            "flush" => PragmaKind::Flush,
            _ => continue,
        };
        out.insert(kind);
    }
    out
}

const MPI_REDUCTIONS: &[&str] =
    &["MPI_Reduce", "MPI_Allreduce", "MPI_Scan", "MPI_Exscan", "MPI_Reduce_scatter", "MPI_Reduce_scatter_block"];
const MPI_ATOMICS: &[&str] = &["MPI_Accumulate", "MPI_Get_accumulate", "MPI_Fetch_and_op", "MPI_Compare_and_swap"];
const MPI_COPIES: &[&str] = &[
    "MPI_Send",
    "MPI_Recv",
    "MPI_Isend",
    "MPI_Irecv",
    "MPI_Sendrecv",
    "MPI_Bcast",
    "MPI_Scatter",
    "MPI_Scatterv",
    "MPI_Gather",
    "MPI_Gatherv",
    "MPI_Allgather",
    "MPI_Allgatherv",
    "MPI_Alltoall",
    "MPI_Alltoallv",
    "MPI_Put",
    "MPI_Get",
];

/// Calls whose result is the team, thread or rank count.
const COUNT_QUERIES: &[&str] = &[
    "omp_get_num_threads",
    "omp_get_max_threads",
    "omp_get_num_teams",
    "omp_get_team_size",
    "omp_get_thread_limit",
    "omp_get_num_procs",
    "MPI_Comm_size",
];
const COUNT: &str = "#count";

const FILE_READERS: &[&str] = &["ifstream", "fstream", "fopen", "freopen", "fdopen", "filesystem", "open", "mmap"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionProfile {
    pub file: String,
    pub line: usize,
    pub pragmas: BTreeSet<PragmaKind>,
    /// Parallel regions in the body nested inside another parallel region.
    pub nested_regions: usize,
    pub mpi_calls: BTreeSet<String>,
    /// Production functions called directly.
    pub calls: BTreeSet<String>,
    pub returns: Option<DataType>,
    /// Positions of parameters taken by non-const pointer or reference.
    pub outputs: Vec<usize>,
}

impl FunctionProfile {
    pub fn reduction(&self) -> bool {
        self.pragmas.contains(&PragmaKind::Reduction) || self.mpi_calls.iter().any(|c| MPI_REDUCTIONS.contains(&c.as_str()))
    }

    pub fn atomic(&self) -> bool {
        self.pragmas.contains(&PragmaKind::Atomic) || self.mpi_calls.iter().any(|c| MPI_ATOMICS.contains(&c.as_str()))
    }

    pub fn memory_copy(&self) -> bool {
        self.pragmas.contains(&PragmaKind::TargetData) || self.mpi_calls.iter().any(|c| MPI_COPIES.contains(&c.as_str()))
    }

    fn merge(&mut self, other: FunctionProfile) {
        self.pragmas.extend(other.pragmas);
        self.nested_regions += other.nested_regions;
        self.mpi_calls.extend(other.mpi_calls);
        self.calls.extend(other.calls);
        self.returns = self.returns.or(other.returns);
        for o in other.outputs {
            if !self.outputs.contains(&o) {
                self.outputs.push(o);
            }
        }
        self.outputs.sort_unstable();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelRegion {
    pub file: String,
    pub line: usize,
    /// 1 for an outermost region.
    pub depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub files: BTreeSet<String>,
    pub functions: BTreeMap<String, FunctionProfile>,
    pub regions: Vec<ParallelRegion>,
    pub nested_regions: usize,
    pub max_depth: usize,
    pub reduction_pragmas: usize,
    pub atomic_pragmas: usize,
    pub target_data_pragmas: usize,
    pub mpi_calls: BTreeSet<String>,
}

impl SourceProfile {
    /// Production functions reachable from `roots` through direct calls,
    /// roots included.
    pub fn reachable<'a>(&'a self, roots: impl IntoIterator<Item = &'a str>) -> BTreeSet<&'a str> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        for r in roots {
            if let Some((k, _)) = self.functions.get_key_value(r) {
                if seen.insert(k) {
                    queue.push_back(k);
                }
            }
        }
        while let Some(f) = queue.pop_front() {
            for c in &self.functions[f].calls {
                if let Some((k, _)) = self.functions.get_key_value(c.as_str()) {
                    if seen.insert(k) {
                        queue.push_back(k);
                    }
                }
            }
        }
        seen
    }

    fn has_file(&self, name: &str) -> bool {
        let base = Path::new(name).file_name().and_then(|b| b.to_str()).unwrap_or(name);
        self.files.iter().any(|f| Path::new(f).file_name().and_then(|b| b.to_str()) == Some(base))
    }
}

fn lex<'a>(file: &Path, src: &'a str) -> Result<Vec<Token<'a>>> {
    let tokens = cxx::tokenize(src);
    cxx::check_braces(&tokens).map_err(|e| ParallelismError::LexFailure { file: file.display().to_string(), message: e.to_string() })?;
    let dead = smells::inactive_ranges(&tokens);
    Ok(tokens.into_iter().filter(|t| !dead.iter().any(|&(a, b)| t.offset > a && t.offset < b)).collect())
}

/// Nesting depth of every parallel pragma in one file, as (line, depth).
/// A region is nested when its pragma lies inside the statement governed
/// by another parallel pragma.
pub fn parallel_depths(file: &Path, src: &str) -> Result<Vec<(usize, usize)>> {
    let tokens = lex(file, src)?;
    Ok(region_depths(&tokens).into_iter().map(|(i, d)| (tokens[i].line, d)).collect())
}

/// (token index, depth) for each parallel pragma.
fn region_depths(tokens: &[Token<'_>]) -> Vec<(usize, usize)> {
    let pragmas = cxx::omp_pragmas(tokens);
    let parallel: Vec<(usize, Option<(usize, usize)>)> = pragmas
        .iter()
        .filter(|p| p.is_parallel())
        .map(|p| {
            let idx = tokens.iter().position(|t| t.offset == p.offset).expect("pragma token");
            (idx, cxx::governed_extent(tokens, idx))
        })
        .collect();
    parallel
        .iter()
        .map(|&(idx, _)| {
            let at = tokens[idx].offset;
            let outer = parallel.iter().filter(|(j, ext)| *j != idx && ext.is_some_and(|(a, b)| a <= at && at < b)).count();
            (idx, outer + 1)
        })
        .collect()
}

fn type_category(words: &[&str]) -> Option<DataType> {
    if words.contains(&"complex") {
        return Some(if words.contains(&"double") { DataType::ComplexDouble } else { DataType::Other });
    }
    if words.contains(&"float") {
        return Some(DataType::Float);
    }
    if words.contains(&"double") {
        return Some(DataType::Double);
    }
    let other = ["int", "long", "short", "char", "bool", "unsigned", "signed", "string"];
    if words.iter().any(|w| other.contains(w) || (w.ends_with("_t") && w.len() > 2)) {
        return Some(DataType::Other);
    }
    None
}

fn literal_type(t: &Token<'_>) -> Option<DataType> {
    if t.kind != TokenKind::Number || t.text.starts_with("0x") || t.text.starts_with("0X") {
        return None;
    }
    let lower = t.text.to_ascii_lowercase();
    if !(lower.contains('.') || lower.contains('e')) {
        return None;
    }
    Some(if lower.ends_with('f') { DataType::Float } else { DataType::Double })
}

/// Return type of a function whose name token sits at code index `name`.
fn return_type(code: &[Token<'_>], mut name: usize) -> Option<DataType> {
    while name >= 2 && code[name - 1].is("::") && code[name - 2].kind == TokenKind::Ident {
        name -= 2;
    }
    let mut words = Vec::new();
    let mut k = name;
    while k > 0 {
        k -= 1;
        let t = code[k];
        if t.is(";") || t.is("{") || t.is("}") || t.is(":") || t.is(")") {
            break;
        }
        if t.kind == TokenKind::Ident {
            words.push(t.text);
        }
    }
    type_category(&words)
}

pub fn analyze_source_parallelism<'a>(files: impl IntoIterator<Item = (&'a Path, &'a str)>) -> Result<SourceProfile> {
    struct Raw {
        name: String,
        profile: FunctionProfile,
        called: Vec<String>,
    }
    let mut profile = SourceProfile::default();
    let mut raw: Vec<Raw> = Vec::new();
    for (path, src) in files {
        let fname = path.display().to_string();
        profile.files.insert(fname.clone());
        let tokens = lex(path, src)?;
        let code: Vec<Token> = tokens.iter().copied().filter(Token::is_code).collect();
        let code_pos: HashMap<usize, usize> = code.iter().enumerate().map(|(i, t)| (t.offset, i)).collect();
        let pragmas = cxx::omp_pragmas(&tokens);
        let depths: HashMap<usize, usize> = region_depths(&tokens).into_iter().map(|(i, d)| (tokens[i].offset, d)).collect();
        for p in &pragmas {
            let kinds = pragma_kinds(p);
            profile.reduction_pragmas += usize::from(kinds.contains(&PragmaKind::Reduction));
            profile.atomic_pragmas += usize::from(kinds.contains(&PragmaKind::Atomic));
            profile.target_data_pragmas += usize::from(kinds.contains(&PragmaKind::TargetData));
            if let Some(&d) = depths.get(&p.offset) {
                profile.regions.push(ParallelRegion { file: fname.clone(), line: p.line, depth: d });
            }
        }
        for (name, _) in cxx::calls_in(&tokens) {
            if name.starts_with("MPI_") {
                profile.mpi_calls.insert(name.to_string());
            }
        }
        let (funcs, _, _) = cxx::declarations(&tokens);
        for f in funcs {
            let (lo, hi) = (tokens[f.open].offset, tokens[f.close].offset);
            let mut fp = FunctionProfile { file: fname.clone(), line: f.start_line, ..Default::default() };
            for p in pragmas.iter().filter(|p| p.offset > lo && p.offset < hi) {
                fp.pragmas.extend(pragma_kinds(p));
                fp.nested_regions += usize::from(depths.get(&p.offset).is_some_and(|&d| d >= 2));
            }
            let body = &tokens[f.open..=f.close];
            let called: Vec<String> = cxx::calls_in(body).into_iter().map(|(n, _)| n.to_string()).collect();
            fp.mpi_calls = called.iter().filter(|n| n.starts_with("MPI_")).cloned().collect();
            let open = code_pos[&tokens[f.open].offset];
            let name_at = (0..open).rev().find(|&j| code[j].is_ident(&f.name) && code.get(j + 1).is_some_and(|n| n.is("(")));
            fp.returns = name_at.and_then(|j| return_type(&code, j));
            if let Some(j) = name_at {
                let close = close_paren(&code, j + 1, code.len());
                for (k, (a, b)) in split_args(&code, j + 2, close).into_iter().enumerate() {
                    let p = &code[a..b];
                    if p.iter().any(|t| t.is("*") || t.is("&") || t.is("&&")) && !p.iter().any(|t| t.is_ident("const")) {
                        fp.outputs.push(k);
                    }
                }
            }
            raw.push(Raw { name: f.name, profile: fp, called });
        }
    }
    let names: HashSet<String> = raw.iter().map(|r| r.name.clone()).collect();
    for r in raw {
        let mut fp = r.profile;
        fp.calls = r.called.into_iter().filter(|c| names.contains(c) && *c != r.name).collect();
        match profile.functions.get_mut(&r.name) {
            Some(existing) => existing.merge(fp),
            None => {
                profile.functions.insert(r.name, fp);
            }
        }
    }
    profile.nested_regions = profile.regions.iter().filter(|r| r.depth >= 2).count();
    profile.max_depth = profile.regions.iter().map(|r| r.depth).max().unwrap_or(0);
    Ok(profile)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelismReport {
    pub has_memory_copy_test: bool,
    pub has_reduction_test: bool,
    pub has_atomic_test: bool,
    pub datatypes_covered: BTreeSet<DataType>,
    pub self_contained: bool,
    pub exit_code_contract: bool,
    pub thread_count_independent: bool,
    pub nested_regions_in_source: usize,
    pub nested_regions_tested: bool,
    pub omp_pragmas_referenced: BTreeSet<PragmaKind>,
    pub mpi_calls_referenced: BTreeSet<String>,
}

impl ParallelismReport {
    /// Flag names in report order, for tables.
    pub const FLAGS: [&'static str; 11] = [
        "has_memory_copy_test",
        "has_reduction_test",
        "has_atomic_test",
        "datatypes_covered",
        "self_contained",
        "exit_code_contract",
        "thread_count_independent",
        "nested_regions_in_source",
        "nested_regions_tested",
        "omp_pragmas_referenced",
        "mpi_calls_referenced",
    ];

    fn field(&self, name: &str) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")[name].clone()
    }
}

/// Token range `[lo, hi)` over code tokens.
type Span = (usize, usize);

/// Splits code into simple statements at `;`, `{` and `}` outside
/// parentheses. Braces that open an initializer list stay inside.
fn statements(code: &[Token<'_>]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut paren = 0i64;
    let mut init: Vec<bool> = Vec::new();
    for (i, t) in code.iter().enumerate() {
        match t.text {
            "(" | "[" if t.kind == TokenKind::Punct => paren += 1,
            ")" | "]" if t.kind == TokenKind::Punct => paren -= 1,
            "{" if t.kind == TokenKind::Punct => {
                let prev = i.checked_sub(1).map(|p| code[p]);
                let is_init = init.last().copied().unwrap_or(false)
                    || paren > 0
                    || prev.is_some_and(|p| p.is("=") || p.is("(") || p.is(",") || p.is_ident("return"));
                init.push(is_init);
                if !is_init {
                    if start < i {
                        out.push((start, i));
                    }
                    start = i + 1;
                }
            }
            "}" if t.kind == TokenKind::Punct => {
                let was_init = init.pop().unwrap_or(false);
                if !was_init {
                    if start < i {
                        out.push((start, i));
                    }
                    start = i + 1;
                }
            }
            ";" if paren == 0 && !init.last().copied().unwrap_or(false) => {
                if start < i {
                    out.push((start, i));
                }
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < code.len() {
        out.push((start, code.len()));
    }
    out
}

fn close_paren(code: &[Token<'_>], open: usize, hi: usize) -> usize {
    let mut depth = 0i64;
    for (j, t) in code.iter().enumerate().take(hi).skip(open) {
        if t.is("(") || t.is("[") || t.is("{") {
            depth += 1;
        } else if t.is(")") || t.is("]") || t.is("}") {
            depth -= 1;
            if depth == 0 {
                return j;
            }
        }
    }
    hi.saturating_sub(1)
}

/// Top-level comma-separated pieces of `code[lo..hi]`.
fn split_args(code: &[Token<'_>], lo: usize, hi: usize) -> Vec<Span> {
    let mut out = Vec::new();
    let mut depth = 0i64;
    let mut start = lo;
    for j in lo..hi {
        let t = code[j];
        if t.is("(") || t.is("[") || t.is("{") {
            depth += 1;
        } else if t.is(")") || t.is("]") || t.is("}") {
            depth -= 1;
        } else if t.is(",") && depth == 0 {
            out.push((start, j));
            start = j + 1;
        }
    }
    if start < hi {
        out.push((start, hi));
    }
    out
}

const KEYWORDS: &[&str] = &["return", "if", "for", "while", "switch", "case", "else", "do", "throw", "delete", "goto", "using", "typedef"];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>="];

struct TestScan<'a, 'p> {
    code: Vec<Token<'a>>,
    profile: &'p SourceProfile,
    local: HashSet<&'a str>,
    /// Production names reachable from each local function body.
    local_summary: HashMap<&'a str, BTreeSet<String>>,
    taint: HashMap<&'a str, BTreeSet<String>>,
    types: HashMap<&'a str, DataType>,
}

impl<'a, 'p> TestScan<'a, 'p> {
    fn is_prod(&self, name: &str) -> bool {
        self.profile.functions.contains_key(name) && !self.local.contains(name)
    }

    fn is_call(&self, j: usize) -> bool {
        self.code[j].kind == TokenKind::Ident && self.code.get(j + 1).is_some_and(|n| n.is("("))
    }

    /// Production names and count markers an expression depends on.
    fn symbols(&self, lo: usize, hi: usize) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for j in lo..hi {
            let t = self.code[j];
            if t.kind != TokenKind::Ident {
                continue;
            }
            if self.is_call(j) {
                if self.is_prod(t.text) {
                    out.insert(t.text.to_string());
                } else if let Some(s) = self.local_summary.get(t.text) {
                    out.extend(s.iter().cloned());
                } else if COUNT_QUERIES.contains(&t.text) && t.text != "MPI_Comm_size" {
                    out.insert(COUNT.to_string());
                }
            } else if let Some(s) = self.taint.get(t.text) {
                out.extend(s.iter().cloned());
            }
        }
        out
    }

    /// Variable written by the left side of an assignment.
    fn target(&self, lo: usize, hi: usize) -> Option<&'a str> {
        let mut j = hi;
        let mut depth = 0i64;
        while j > lo {
            j -= 1;
            let t = self.code[j];
            if t.is("]") || t.is(")") {
                depth += 1;
            } else if t.is("[") || t.is("(") {
                depth -= 1;
            } else if depth == 0 && t.kind == TokenKind::Ident {
                let mut k = j;
                while k >= lo + 2 && (self.code[k - 1].is(".") || self.code[k - 1].is("->")) && self.code[k - 2].kind == TokenKind::Ident {
                    k -= 2;
                }
                return Some(self.code[k].text);
            }
        }
        None
    }

    /// Records a declaration `T name ...` found in a statement.
    fn declaration(&mut self, lo: usize, hi: usize, rhs: Option<Span>) {
        if KEYWORDS.contains(&self.code[lo].text) {
            return;
        }
        let mut flat: Vec<usize> = Vec::new();
        let mut depth = 0i64;
        for j in lo..hi {
            let t = self.code[j];
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth -= 1;
            } else if depth == 0 {
                flat.push(j);
            }
        }
        let Some(pos) = flat.iter().rposition(|&j| self.code[j].kind == TokenKind::Ident) else { return };
        if pos == 0 {
            return;
        }
        let prev = self.code[flat[pos - 1]];
        if !(prev.kind == TokenKind::Ident || prev.is("*") || prev.is("&") || prev.is("&&") || prev.is(">")) {
            return;
        }
        let words: Vec<&str> = flat[..pos].iter().map(|&j| self.code[j]).filter(|t| t.kind == TokenKind::Ident).map(|t| t.text).collect();
        let name = self.code[flat[pos]].text;
        let ty = if words.contains(&"auto") {
            rhs.and_then(|(a, b)| {
                (a..b)
                    .find(|&j| self.is_call(j) && self.is_prod(self.code[j].text))
                    .and_then(|j| self.profile.functions[self.code[j].text].returns)
            })
        } else {
            type_category(&words)
        };
        if let Some(ty) = ty {
            self.types.insert(name, ty);
        }
    }

    fn taint_add(&mut self, name: &'a str, syms: &BTreeSet<String>) -> bool {
        if syms.is_empty() {
            return false;
        }
        let e = self.taint.entry(name).or_default();
        let before = e.len();
        e.extend(syms.iter().cloned());
        e.len() != before
    }

    /// One pass over all statements; returns whether any taint grew.
    fn propagate(&mut self, stmts: &[Span]) -> bool {
        let mut changed = false;
        for &(lo, hi) in stmts {
            let mut depth = 0i64;
            let mut op = None;
            for j in lo..hi {
                let t = self.code[j];
                if t.is("(") || t.is("[") || t.is("{") {
                    depth += 1;
                } else if t.is(")") || t.is("]") || t.is("}") {
                    depth -= 1;
                } else if depth == 0 && t.kind == TokenKind::Punct && ASSIGN_OPS.contains(&t.text) {
                    op = Some(j);
                    break;
                }
            }
            if let Some(op) = op {
                if let Some(name) = self.target(lo, op) {
                    let syms = self.symbols(op + 1, hi);
                    changed |= self.taint_add(name, &syms);
                }
            }
            // arguments of production calls may be outputs
            for j in lo..hi {
                if !self.is_call(j) {
                    continue;
                }
                let callee = self.code[j].text;
                let (mark, outputs): (BTreeSet<String>, &[usize]) = if self.is_prod(callee) {
                    ([callee.to_string()].into(), &self.profile.functions[callee].outputs)
                } else if callee == "MPI_Comm_size" {
                    ([COUNT.to_string()].into(), &[1])
                } else {
                    continue;
                };
                let close = close_paren(&self.code, j + 1, hi);
                let args = split_args(&self.code, j + 2, close);
                for (a, b) in outputs.iter().filter_map(|&k| args.get(k).copied()).collect::<Vec<_>>() {
                    let mut k = a;
                    while k < b && (self.code[k].is("&") || self.code[k].is("*")) {
                        k += 1;
                    }
                    if k < b && self.code[k].kind == TokenKind::Ident && !self.is_call(k) {
                        let name = self.code[k].text;
                        changed |= self.taint_add(name, &mark);
                    }
                }
            }
        }
        changed
    }

    fn expr_types(&self, lo: usize, hi: usize) -> BTreeSet<DataType> {
        let mut out = BTreeSet::new();
        for j in lo..hi {
            let t = self.code[j];
            if let Some(ty) = literal_type(&t) {
                out.insert(ty);
            } else if t.kind == TokenKind::Ident {
                if self.is_call(j) {
                    if self.is_prod(t.text) {
                        out.extend(self.profile.functions[t.text].returns);
                    }
                } else if let Some(&ty) = self.types.get(t.text) {
                    if j == lo || !(self.code[j - 1].is(".") || self.code[j - 1].is("->")) {
                        out.insert(ty);
                    }
                }
            }
        }
        out
    }

    fn literal_only(&self, lo: usize, hi: usize) -> bool {
        let toks = &self.code[lo..hi];
        toks.iter().any(|t| t.kind == TokenKind::Number)
            && toks.iter().all(|t| t.kind == TokenKind::Number || t.is("(") || t.is(")") || t.is("-") || t.is("+"))
    }

    fn count_side(&self, lo: usize, hi: usize) -> bool {
        self.symbols(lo, hi).contains(COUNT)
    }

    /// An equality between a thread/rank count and a literal.
    fn pins_count(&self, lo: usize, hi: usize, macro_name: Option<&str>) -> bool {
        if let Some(m) = macro_name {
            let compares = m.contains("_EQ") || m.contains("_NE");
            if compares {
                let parts: Vec<Span> = split_args(&self.code, lo, hi)
                    .into_iter()
                    .filter(|&(a, b)| !(b == a + 1 && self.code[a].kind == TokenKind::Str))
                    .collect();
                if parts.len() >= 2 {
                    let (x, y) = (parts[0], parts[1]);
                    return (self.count_side(x.0, x.1) && self.literal_only(y.0, y.1))
                        || (self.count_side(y.0, y.1) && self.literal_only(x.0, x.1));
                }
            }
        }
        let mut clauses = Vec::new();
        let mut depth = 0i64;
        let mut start = lo;
        for j in lo..hi {
            let t = self.code[j];
            if t.is("(") || t.is("[") {
                depth += 1;
            } else if t.is(")") || t.is("]") {
                depth -= 1;
            } else if depth == 0 && (t.is("&&") || t.is("||") || t.is(",")) {
                clauses.push((start, j));
                start = j + 1;
            }
        }
        clauses.push((start, hi));
        clauses.into_iter().any(|(a, b)| {
            let mut strip = (a, b);
            while strip.1 > strip.0 + 1 && self.code[strip.0].is("(") && close_paren(&self.code, strip.0, strip.1) == strip.1 - 1 {
                strip = (strip.0 + 1, strip.1 - 1);
            }
            if strip != (a, b) {
                return self.pins_count(strip.0, strip.1, None);
            }
            let mut depth = 0i64;
            for j in a..b {
                let t = self.code[j];
                if t.is("(") || t.is("[") {
                    depth += 1;
                } else if t.is(")") || t.is("]") {
                    depth -= 1;
                } else if depth == 0 && (t.is("==") || t.is("!=")) {
                    return (self.count_side(a, j) && self.literal_only(j + 1, b))
                        || (self.count_side(j + 1, b) && self.literal_only(a, j));
                }
            }
            false
        })
    }
}

fn returns_in(code: &[Token<'_>], lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in lo..hi {
        if code[j].is_ident("return") {
            let end = (j..hi).find(|&k| code[k].is(";")).unwrap_or(hi);
            out.push((j + 1, end));
        }
    }
    out
}

/// Whether a test file reports success by exit status 0 and failure by a
/// nonzero status.
fn exit_code_contract(code: &[Token<'_>], funcs: &[(String, usize, usize)], has_macro_check: bool) -> bool {
    if funcs.iter().any(|(n, _, _)| cxx::TEST_MACROS.contains(&n.as_str())) {
        return true;
    }
    let Some(&(_, open, close)) = funcs.iter().find(|(n, _, _)| n == "main") else { return false };
    let mut success = false;
    let mut failure = has_macro_check;
    let rets = returns_in(code, open + 1, close);
    for &(a, b) in &rets {
        let toks = &code[a..b];
        match toks {
            [t] if t.text == "0" || t.is_ident("EXIT_SUCCESS") => success = true,
            [t] if t.kind == TokenKind::Number || t.is_ident("EXIT_FAILURE") => failure = true,
            [t, ..] if t.is("-") => failure = true,
            [] => {}
            _ => {
                success = true;
                failure = true;
            }
        }
    }
    // falling off the end of main returns 0
    let last_stmt_start = (open + 1..close)
        .rev()
        .find(|&j| code[j].is(";") || code[j].is("}"))
        .map(|e| (open + 1..e).rev().find(|&j| code[j].is(";") || code[j].is("{") || code[j].is("}")).map(|s| s + 1).unwrap_or(open + 1));
    if !last_stmt_start.is_some_and(|s| code[s].is_ident("return")) {
        success = true;
    }
    for j in 0..code.len() {
        let t = code[j];
        if t.is_ident("throw") {
            failure = true;
        }
        if t.kind != TokenKind::Ident || !code.get(j + 1).is_some_and(|n| n.is("(")) {
            continue;
        }
        match t.text {
            "abort" | "MPI_Abort" | "terminate" | "quick_exit" | "_Exit" => failure = true,
            "exit" => {
                let arg = code.get(j + 2);
                if !arg.is_some_and(|a| (a.text == "0" || a.is_ident("EXIT_SUCCESS")) && code.get(j + 3).is_some_and(|c| c.is(")"))) {
                    failure = true;
                }
            }
            _ => {}
        }
    }
    success && failure
}

pub fn analyze_test_parallelism(file: &Path, src: &str, profile: &SourceProfile) -> Result<ParallelismReport> {
    let tokens = lex(file, src)?;
    let code: Vec<Token> = tokens.iter().copied().filter(Token::is_code).collect();
    let code_pos: HashMap<usize, usize> = code.iter().enumerate().map(|(i, t)| (t.offset, i)).collect();
    let (funcs, _, _) = cxx::declarations(&tokens);
    let spans: Vec<(String, usize, usize)> =
        funcs.iter().map(|f| (f.name.clone(), code_pos[&tokens[f.open].offset], code_pos[&tokens[f.close].offset])).collect();
    let local: HashSet<&str> = funcs.iter().map(|f| f.name.as_str()).filter(|n| !cxx::TEST_MACROS.contains(n) && *n != "main").collect();

    let mut scan = TestScan { code, profile, local, local_summary: HashMap::new(), taint: HashMap::new(), types: HashMap::new() };

    // production reach of local helpers, to a fixpoint
    loop {
        let mut changed = false;
        for (name, open, close) in &spans {
            let Some(&key) = scan.local.get(name.as_str()) else { continue };
            let syms: BTreeSet<String> = scan.symbols(*open + 1, *close).into_iter().filter(|s| s != COUNT).collect();
            let e = scan.local_summary.entry(key).or_default();
            let before = e.len();
            e.extend(syms);
            changed |= e.len() != before;
        }
        if !changed {
            break;
        }
    }

    let stmts = statements(&scan.code);
    // for-init declarations sit inside the header's parentheses
    let for_inits: Vec<Span> = stmts
        .iter()
        .filter(|&&(lo, hi)| hi > lo + 2 && scan.code[lo].is_ident("for") && scan.code[lo + 1].is("("))
        .filter_map(|&(lo, hi)| {
            let mut depth = 0i64;
            (lo + 2..hi)
                .find(|&j| {
                    let t = scan.code[j];
                    if t.is("(") || t.is("[") || t.is("{") {
                        depth += 1;
                    } else if t.is(")") || t.is("]") || t.is("}") {
                        depth -= 1;
                    }
                    depth == 0 && (t.is(";") || t.is(":"))
                })
                .filter(|&end| end > lo + 2)
                .map(|end| (lo + 2, end))
        })
        .collect();
    for &(lo, hi) in stmts.iter().chain(&for_inits) {
        let mut depth = 0i64;
        let op = (lo..hi).find(|&j| {
            let t = scan.code[j];
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth -= 1;
            }
            depth == 0 && t.is("=")
        });
        match op {
            Some(op) => scan.declaration(lo, op, Some((op + 1, hi))),
            None => scan.declaration(lo, hi, None),
        }
    }
    for _ in 0..16 {
        if !scan.propagate(&stmts) {
            break;
        }
    }

    let sites = smells::check_sites(file, src)
        .map_err(|e| ParallelismError::LexFailure { file: file.display().to_string(), message: e.to_string() })?;
    let mut asserted: BTreeSet<String> = BTreeSet::new();
    let mut datatypes = BTreeSet::new();
    let mut pinned = false;
    for s in &sites {
        let lo = scan.code.partition_point(|t| t.offset < s.expr.0);
        let hi = scan.code.partition_point(|t| t.offset < s.expr.1);
        asserted.extend(scan.symbols(lo, hi).into_iter().filter(|n| profile.functions.contains_key(n)));
        datatypes.extend(scan.expr_types(lo, hi));
        pinned |= scan.pins_count(lo, hi, s.macro_name.as_deref());
    }

    let fp = |n: &String| &profile.functions[n];
    let has_reduction_test = asserted.iter().any(|n| fp(n).reduction());
    let has_atomic_test = asserted.iter().any(|n| fp(n).atomic());
    let has_memory_copy_test = asserted.iter().any(|n| fp(n).memory_copy());
    let nested_regions_tested =
        profile.reachable(asserted.iter().map(String::as_str)).iter().any(|f| profile.functions[*f].nested_regions > 0);

    let invoked: BTreeSet<&str> = (0..scan.code.len())
        .filter(|&j| scan.is_call(j) && (scan.is_prod(scan.code[j].text) || scan.local_summary.contains_key(scan.code[j].text)))
        .flat_map(|j| {
            let name = scan.code[j].text;
            match scan.local_summary.get(name) {
                Some(s) => s.iter().map(String::as_str).collect::<Vec<_>>(),
                None => vec![name],
            }
        })
        .collect();
    let reach = profile.reachable(invoked);
    let mut omp_pragmas_referenced: BTreeSet<PragmaKind> =
        reach.iter().flat_map(|f| profile.functions[*f].pragmas.iter().copied()).collect();
    for p in cxx::omp_pragmas(&tokens) {
        omp_pragmas_referenced.extend(pragma_kinds(&p));
    }
    let mut mpi_calls_referenced: BTreeSet<String> = reach.iter().flat_map(|f| profile.functions[*f].mpi_calls.iter().cloned()).collect();
    for (name, _) in cxx::calls_in(&tokens) {
        if name.starts_with("MPI_") && name[4..].starts_with(|c: char| c.is_ascii_uppercase()) {
            mpi_calls_referenced.insert(name.to_string());
        }
    }

    let mut self_contained = true;
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Directive) {
        if let Some((target, true)) = cxx::include_target(t.text) {
            if !profile.has_file(&target) {
                self_contained = false;
            }
        }
    }
    for (j, t) in scan.code.iter().enumerate() {
        if t.kind != TokenKind::Ident {
            continue;
        }
        let reads = FILE_READERS.contains(&t.text) && (t.text != "open" || scan.is_call(j));
        let ext = t.is_ident("extern") && !scan.code.get(j + 1).is_some_and(|n| n.kind == TokenKind::Str);
        if reads || ext {
            self_contained = false;
        }
    }

    let has_macro_check = sites.iter().any(|s| s.macro_name.is_some());
    Ok(ParallelismReport {
        has_memory_copy_test,
        has_reduction_test,
        has_atomic_test,
        datatypes_covered: datatypes,
        self_contained,
        exit_code_contract: exit_code_contract(&scan.code, &spans, has_macro_check),
        thread_count_independent: !pinned,
        nested_regions_in_source: profile.nested_regions,
        nested_regions_tested,
        omp_pragmas_referenced,
        mpi_calls_referenced,
    })
}

/// Analyzes several test files against one profile, in parallel.
pub fn analyze_tests(tests: &[(String, String)], profile: &SourceProfile) -> Vec<(String, Result<ParallelismReport>)> {
    tests.par_iter().map(|(name, src)| (name.clone(), analyze_test_parallelism(Path::new(name), src, profile))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Gold has it, generated does not.
    Missing,
    /// Generated has it, gold does not.
    Extra,
    Superset,
    Subset,
    Differs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagDelta {
    pub flag: String,
    pub generated: serde_json::Value,
    pub gold: serde_json::Value,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldComparison {
    pub equal: Vec<String>,
    pub deltas: Vec<FlagDelta>,
    pub matches: bool,
}

pub fn gold_comparison(generated: &ParallelismReport, gold: &ParallelismReport) -> GoldComparison {
    let mut equal = Vec::new();
    let mut deltas = Vec::new();
    for flag in ParallelismReport::FLAGS {
        let (g, r) = (generated.field(flag), gold.field(flag));
        if g == r {
            equal.push(flag.to_string());
            continue;
        }
        let relation = match (&g, &r) {
            (serde_json::Value::Bool(true), serde_json::Value::Bool(false)) => Relation::Extra,
            (serde_json::Value::Bool(false), serde_json::Value::Bool(true)) => Relation::Missing,
            (serde_json::Value::Array(a), serde_json::Value::Array(b)) => {
                let (a, b): (HashSet<String>, HashSet<String>) =
                    (a.iter().map(|v| v.to_string()).collect(), b.iter().map(|v| v.to_string()).collect());
                if a.is_superset(&b) {
                    Relation::Superset
                } else if a.is_subset(&b) {
                    Relation::Subset
                } else {
                    Relation::Differs
                }
            }
            _ => Relation::Differs,
        };
        deltas.push(FlagDelta { flag: flag.to_string(), generated: g, gold: r, relation });
    }
    GoldComparison { matches: deltas.is_empty(), equal, deltas }
}
