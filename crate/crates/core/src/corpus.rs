//! Project ingestion: manifests, test discovery, template extraction and
//! prompt context bundles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::cxx::{self, EntryPoint, ItemKind};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest {path}: missing or empty field `{field}`")]
    MissingField { path: PathBuf, field: &'static str },
    #[error("manifest {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("project root {0} does not exist")]
    RootNotFound(PathBuf),
    #[error("no test files under {root} match {globs:?}")]
    NoTestsMatched { root: PathBuf, globs: Vec<String> },
    #[error("manifest declares {declared} but no {marker} marker found in sources")]
    FrameworkMismatch { declared: ParallelFramework, marker: &'static str },
    #[error("invalid glob `{glob}`: {message}")]
    BadGlob { glob: String, message: String },
    #[error("{path}: {source}")]
    UnbalancedBraces { path: PathBuf, source: cxx::BraceError },
    #[error("{0}: no `int main` or test registration macro")]
    NoEntryPoint(PathBuf),
    #[error("source `{include}` included by {template} not found")]
    SourceNotFound { template: String, include: String },
    #[error("duplicate test id `{0}`")]
    DuplicateTestId(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParallelFramework {
    OpenMP,
    #[serde(rename = "MPI")]
    Mpi,
    Both,
}

impl fmt::Display for ParallelFramework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParallelFramework::OpenMP => "OpenMP",
            ParallelFramework::Mpi => "MPI",
            ParallelFramework::Both => "Both",
        })
    }
}

/// A target C++ project as described by its manifest file.
///
/// `build_command` may contain `{target}`, replaced by the test's build
/// target (the file stem); without it the target is appended. `launcher`
/// may contain `{ranks}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectManifest {
    pub name: String,
    pub root: PathBuf,
    pub build_command: Vec<String>,
    #[serde(default)]
    pub test_build_targets: Vec<String>,
    pub test_glob: Vec<String>,
    pub source_globs: Vec<String>,
    pub parallel_framework: ParallelFramework,
    #[serde(default)]
    pub star_count: Option<u64>,
    #[serde(default)]
    pub docs_language: Option<String>,
    /// Built binary, relative to the root; `{target}` is substituted.
    #[serde(default = "default_binary_path")]
    pub binary_path: String,
    #[serde(default)]
    pub launcher: Vec<String>,
    /// Environment variable the build appends to its compiler flags.
    #[serde(default = "default_flags_env")]
    pub extra_flags_env: String,
}

fn default_binary_path() -> String {
    "build/{target}".into()
}

fn default_flags_env() -> String {
    "TESTGEN_EXTRA_FLAGS".into()
}

/// Popularity below this star count triggers a soft-criteria warning.
pub const MIN_STARS: u64 = 10;

impl ProjectManifest {
    /// Soft selection criteria: popularity and documented tests. These only
    /// warn.
    pub fn soft_criteria_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        match self.star_count {
            None => w.push(format!("{}: no star_count; popularity unknown", self.name)),
            Some(s) if s < MIN_STARS => w.push(format!("{}: low popularity ({s} stars)", self.name)),
            _ => {}
        }
        match self.docs_language.as_deref() {
            None => w.push(format!("{}: docs_language not set", self.name)),
            Some(l) if !l.eq_ignore_ascii_case("en") => w.push(format!("{}: tests documented in `{l}`, not English", self.name)),
            _ => {}
        }
        w
    }

    pub fn test_set(&self) -> Result<GlobSet> {
        glob_set(&self.test_glob)
    }

    pub fn source_set(&self) -> Result<GlobSet> {
        glob_set(&self.source_globs)
    }

    /// Production source files, relative to the root, sorted.
    pub fn source_files(&self) -> Result<Vec<PathBuf>> {
        let set = self.source_set()?;
        Ok(walk_matching(&self.root, &set))
    }

    /// Build command for one target, with `{target}` substituted.
    pub fn build_argv(&self, target: &str) -> Vec<String> {
        let mut argv: Vec<String> = self.build_command.iter().map(|a| a.replace("{target}", target)).collect();
        if !self.build_command.iter().any(|a| a.contains("{target}")) {
            argv.push(target.to_string());
        }
        argv
    }

    pub fn binary_for(&self, target: &str) -> PathBuf {
        PathBuf::from(self.binary_path.replace("{target}", target))
    }

    pub fn launcher_argv(&self, ranks: usize) -> Vec<String> {
        self.launcher.iter().map(|a| a.replace("{ranks}", &ranks.to_string())).collect()
    }

    pub fn uses_mpi(&self) -> bool {
        matches!(self.parallel_framework, ParallelFramework::Mpi | ParallelFramework::Both)
    }
}

fn glob_set(globs: &[String]) -> Result<GlobSet> {
    let mut b = GlobSetBuilder::new();
    for g in globs {
        let glob = Glob::new(g).map_err(|e| CorpusError::BadGlob { glob: g.clone(), message: e.to_string() })?;
        b.add(glob);
    }
    b.build().map_err(|e| CorpusError::BadGlob { glob: globs.join(","), message: e.to_string() })
}

fn walk_matching(root: &Path, set: &GlobSet) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter_map(|e| e.path().strip_prefix(root).ok().map(Path::to_path_buf))
        .filter(|rel| set.is_match(rel))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Reads and validates a manifest. `root` is resolved against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<ProjectManifest> {
    let text = read(path)?;
    let mut m: ProjectManifest = toml::from_str(&text).map_err(|e| {
        let message = e.message().to_string();
        match message.strip_prefix("missing field `").and_then(|r| r.strip_suffix('`')) {
            Some(field) => CorpusError::MissingField { path: path.to_path_buf(), field: static_field(field) },
            None => CorpusError::Parse { path: path.to_path_buf(), message },
        }
    })?;
    if m.root.is_relative() {
        let base = path.parent().unwrap_or(Path::new("."));
        m.root = base.join(&m.root);
    }
    validate_manifest(&m, path)?;
    for w in m.soft_criteria_warnings() {
        log::warn!("{w}");
    }
    Ok(m)
}

fn static_field(name: &str) -> &'static str {
    const FIELDS: &[&str] = &["name", "root", "build_command", "test_build_targets", "test_glob", "source_globs", "parallel_framework"];
    FIELDS.iter().find(|f| **f == name).copied().unwrap_or("unknown")
}

pub fn validate_manifest(m: &ProjectManifest, path: &Path) -> Result<()> {
    let missing = |field| CorpusError::MissingField { path: path.to_path_buf(), field };
    if m.name.trim().is_empty() {
        return Err(missing("name"));
    }
    if m.build_command.is_empty() || m.build_command[0].trim().is_empty() {
        return Err(missing("build_command"));
    }
    if m.test_glob.is_empty() {
        return Err(missing("test_glob"));
    }
    if m.source_globs.is_empty() {
        return Err(missing("source_globs"));
    }
    if !m.root.is_dir() {
        return Err(CorpusError::RootNotFound(m.root.clone()));
    }
    let tests = walk_matching(&m.root, &m.test_set()?);
    if tests.is_empty() {
        return Err(CorpusError::NoTestsMatched { root: m.root.clone(), globs: m.test_glob.clone() });
    }
    let sources = m.source_files()?;
    let mut has_omp = false;
    let mut has_mpi = false;
    for rel in &sources {
        let text = read(&m.root.join(rel))?;
        let toks = cxx::tokenize(&text);
        has_omp |= !cxx::omp_pragmas(&toks).is_empty();
        has_mpi |= toks.iter().any(|t| t.kind == cxx::TokenKind::Ident && t.text.starts_with("MPI_"));
    }
    let needs_omp = matches!(m.parallel_framework, ParallelFramework::OpenMP | ParallelFramework::Both);
    if needs_omp && !has_omp {
        return Err(CorpusError::FrameworkMismatch { declared: m.parallel_framework, marker: "`#pragma omp`" });
    }
    if m.uses_mpi() && !has_mpi {
        return Err(CorpusError::FrameworkMismatch { declared: m.parallel_framework, marker: "`MPI_`" });
    }
    Ok(())
}

/// Standalone test files matching the manifest's test globs, relative to
/// the root and sorted.
pub fn discover_tests(m: &ProjectManifest) -> Result<Vec<PathBuf>> {
    let set = m.test_set()?;
    let mut out = Vec::new();
    for rel in walk_matching(&m.root, &set) {
        let text = read(&m.root.join(&rel))?;
        if cxx::is_standalone(&text) {
            out.push(rel);
        } else {
            log::debug!("{}: skipped, no entry point", rel.display());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertionStyle {
    ExitCode,
    AssertMacro,
    PrintPattern,
}

/// Half-open 1-based line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpan {
    pub start: usize,
    pub end: usize,
}

impl LineSpan {
    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreambleSlot {
    Include,
    Global,
}

/// Skeleton of one human-written test: everything but the test logic,
/// which is kept aside as the gold standard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestTemplate {
    pub id: String,
    pub source_path: PathBuf,
    pub includes: Vec<String>,
    pub doc_comment: String,
    pub globals_and_helpers: Vec<String>,
    /// File order of `includes` and `globals_and_helpers` entries.
    pub layout: Vec<PreambleSlot>,
    /// `int main(...) {`; empty for macro-registered tests.
    pub entry_signature: String,
    pub body_hole_span: LineSpan,
    pub original_body: String,
    /// Closing brace of the entry point and anything after it.
    pub entry_close: String,
    pub assertion_style: AssertionStyle,
}

impl TestTemplate {
    /// Includes, globals and doc comment in file order, newline-terminated.
    pub fn preamble(&self) -> String {
        let mut out = String::new();
        let mut inc = self.includes.iter();
        let mut glob = self.globals_and_helpers.iter();
        for slot in &self.layout {
            let piece = match slot {
                PreambleSlot::Include => inc.next(),
                PreambleSlot::Global => glob.next(),
            };
            if let Some(p) = piece {
                out.push_str(p);
                out.push('\n');
            }
        }
        if !self.doc_comment.is_empty() {
            out.push_str(&self.doc_comment);
            out.push('\n');
        }
        out
    }

    /// The template with its body hole: what an out-of-the-box completion
    /// continues from.
    pub fn prefix(&self) -> String {
        let mut out = self.preamble();
        if !self.entry_signature.is_empty() {
            out.push_str(&self.entry_signature);
            out.push('\n');
        }
        out
    }

    /// Prefix, gold body and closing: the original file modulo whitespace.
    pub fn render(&self) -> String {
        let mut out = self.prefix();
        if !self.original_body.is_empty() {
            out.push_str(&self.original_body);
            out.push('\n');
        }
        if !self.entry_close.is_empty() {
            out.push_str(&self.entry_close);
            out.push('\n');
        }
        out
    }

    /// The build target name.
    pub fn target(&self) -> &str {
        &self.id
    }
}

pub fn test_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads a test file and splits it into a template.
pub fn extract_template(root: &Path, rel: &Path) -> Result<TestTemplate> {
    let text = read(&root.join(rel))?;
    extract_template_from(rel, &text)
}

pub fn extract_template_from(rel: &Path, src: &str) -> Result<TestTemplate> {
    let tokens = cxx::tokenize(src);
    cxx::check_braces(&tokens).map_err(|source| CorpusError::UnbalancedBraces { path: rel.to_path_buf(), source })?;
    let items = cxx::items(&tokens, 0);
    let entry = cxx::find_entry_point(&tokens, &items).ok_or_else(|| CorpusError::NoEntryPoint(rel.to_path_buf()))?;
    let entry_item = match entry {
        EntryPoint::Main { item, .. } | EntryPoint::Macro { item } => item,
    };

    // the contiguous comment run directly above the entry point
    let mut doc_start = entry_item;
    while doc_start > 0 {
        let prev = &items[doc_start - 1];
        let next_line = items[doc_start].start_line;
        if prev.kind == ItemKind::Comment && prev.end_line + 1 >= next_line {
            doc_start -= 1;
        } else {
            break;
        }
    }

    let mut includes = Vec::new();
    let mut globals = Vec::new();
    let mut layout = Vec::new();
    let mut pending_comments: Vec<&str> = Vec::new();
    let mut pending_line = 0usize;
    for item in &items[..doc_start] {
        let text = item.text(src).trim_end();
        match item.kind {
            ItemKind::Directive if cxx::is_include(text) => {
                flush_comments(&mut pending_comments, &mut globals, &mut layout);
                includes.push(text.to_string());
                layout.push(PreambleSlot::Include);
            }
            ItemKind::Comment => {
                if !pending_comments.is_empty() && item.start_line > pending_line + 1 {
                    flush_comments(&mut pending_comments, &mut globals, &mut layout);
                }
                pending_comments.push(text);
                pending_line = item.end_line;
            }
            _ => {
                // comments directly above a declaration travel with it
                let attached = !pending_comments.is_empty() && item.start_line <= pending_line + 1;
                if !attached {
                    flush_comments(&mut pending_comments, &mut globals, &mut layout);
                }
                let mut block = pending_comments.drain(..).collect::<Vec<_>>().join("\n");
                if !block.is_empty() {
                    block.push('\n');
                }
                block.push_str(text);
                globals.push(block);
                layout.push(PreambleSlot::Global);
            }
        }
    }
    flush_comments(&mut pending_comments, &mut globals, &mut layout);

    let doc_comment = items[doc_start..entry_item].iter().map(|i| i.text(src).trim_end()).collect::<Vec<_>>().join("\n");

    let entry_start = items[entry_item].start;
    let (entry_signature, body_start, body_end, close_start) = match entry {
        EntryPoint::Main { open, close, .. } => {
            let mut sig_end = tokens[open].end();
            // rest of the signature line, if blank, belongs to the signature
            let line_rest = src[sig_end..].find('\n').map_or(src.len(), |n| sig_end + n);
            if src[sig_end..line_rest].trim().is_empty() {
                sig_end = line_rest;
            }
            let mut close_at = tokens[close].offset;
            let line_begin = src[..close_at].rfind('\n').map_or(0, |n| n + 1);
            if src[line_begin..close_at].trim().is_empty() {
                close_at = line_begin;
            }
            let close_at = close_at.max(sig_end);
            (src[entry_start..sig_end].trim_end().to_string(), sig_end, close_at, close_at)
        }
        EntryPoint::Macro { .. } => (String::new(), entry_start, src.len(), src.len()),
    };
    let raw_body = &src[body_start..body_end];
    let original_body = raw_body.trim_end().trim_start_matches(['\n', '\r']).to_string();
    let first_body_line = line_of(src, body_start) + usize::from(src[body_start..].starts_with('\n'));
    let body_hole_span = if original_body.is_empty() {
        LineSpan { start: first_body_line, end: first_body_line }
    } else {
        let lead = raw_body.len() - raw_body.trim_start_matches(['\n', '\r']).len();
        let start = line_of(src, body_start + lead);
        LineSpan { start, end: start + original_body.lines().count() }
    };
    let entry_close = src[close_start..].trim().to_string();

    Ok(TestTemplate {
        id: test_id(rel),
        source_path: rel.to_path_buf(),
        assertion_style: classify_assertions(src),
        includes,
        doc_comment,
        globals_and_helpers: globals,
        layout,
        entry_signature,
        body_hole_span,
        original_body,
        entry_close,
    })
}

fn flush_comments(pending: &mut Vec<&str>, globals: &mut Vec<String>, layout: &mut Vec<PreambleSlot>) {
    if !pending.is_empty() {
        globals.push(pending.drain(..).collect::<Vec<_>>().join("\n"));
        layout.push(PreambleSlot::Global);
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset].matches('\n').count() + 1
}

const ASSERT_MACRO_PREFIXES: &[&str] = &["EXPECT_", "ASSERT_", "CPPUNIT_ASSERT", "REQUIRE", "CHECK", "BOOST_CHECK", "BOOST_REQUIRE"];

pub fn classify_assertions(src: &str) -> AssertionStyle {
    let toks = cxx::tokenize(src);
    let prints_markers = toks.iter().any(|t| {
        t.kind == cxx::TokenKind::Str && (t.text.contains("completed successfully") || t.text.contains("completed unsuccessfully"))
    });
    if prints_markers {
        return AssertionStyle::PrintPattern;
    }
    let framework = toks.iter().any(|t| {
        t.kind == cxx::TokenKind::Ident
            && (cxx::TEST_MACROS.contains(&t.text) || ASSERT_MACRO_PREFIXES.iter().any(|p| t.text.starts_with(p)))
    });
    if framework {
        AssertionStyle::AssertMacro
    } else {
        AssertionStyle::ExitCode
    }
}

/// Discovers and extracts every test of a project.
pub fn load_templates(m: &ProjectManifest) -> Result<Vec<TestTemplate>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rel in discover_tests(m)? {
        let t = extract_template(&m.root, &rel)?;
        if !seen.insert(t.id.clone()) {
            return Err(CorpusError::DuplicateTestId(t.id));
        }
        out.push(t);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    FullContext,
    NoContext,
    LibrariesOnly,
}

impl ContextMode {
    pub const ALL: [ContextMode; 3] = [ContextMode::NoContext, ContextMode::FullContext, ContextMode::LibrariesOnly];

    pub fn as_str(&self) -> &'static str {
        match self {
            ContextMode::FullContext => "full_context",
            ContextMode::NoContext => "no_context",
            ContextMode::LibrariesOnly => "libraries_only",
        }
    }
}

impl fmt::Display for ContextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ContextMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full_context" | "full" => Ok(ContextMode::FullContext),
            "no_context" | "none" | "oob" => Ok(ContextMode::NoContext),
            "libraries_only" | "libraries" => Ok(ContextMode::LibrariesOnly),
            other => Err(format!("unknown context mode `{other}`")),
        }
    }
}

/// Prompt context for one template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub mode: ContextMode,
    pub code_under_test: String,
    pub library_headers: Vec<String>,
    pub class_and_global_decls: String,
    pub template: TestTemplate,
}

const IMPL_EXTENSIONS: &[&str] = &["cpp", "cc", "cxx", "c", "C"];

pub fn build_context(m: &ProjectManifest, template: &TestTemplate, mode: ContextMode) -> Result<ContextBundle> {
    let mut bundle = ContextBundle {
        mode,
        code_under_test: String::new(),
        library_headers: Vec::new(),
        class_and_global_decls: String::new(),
        template: template.clone(),
    };
    match mode {
        ContextMode::NoContext => {}
        ContextMode::LibrariesOnly => bundle.library_headers = library_headers(template),
        ContextMode::FullContext => {
            bundle.library_headers = library_headers(template);
            let reachable = reachable_headers(m, template)?;
            let sources = m.source_files()?;
            let mut code = String::new();
            let mut decls = String::new();
            for header in &reachable {
                let text = read(&m.root.join(header))?;
                let decl_text = header_declarations(&text);
                if !decl_text.is_empty() {
                    decls.push_str(&decl_text);
                    decls.push('\n');
                }
                let stem = header.file_stem();
                let impls: Vec<&PathBuf> = sources
                    .iter()
                    .filter(|s| s.file_stem() == stem)
                    .filter(|s| s.extension().and_then(|e| e.to_str()).is_some_and(|e| IMPL_EXTENSIONS.contains(&e)))
                    .collect();
                let bodies: Vec<&PathBuf> = if impls.is_empty() { vec![header] } else { impls };
                for file in bodies {
                    code.push_str(&format!("// file: {}\n", file.display()));
                    code.push_str(read(&m.root.join(file))?.trim_end());
                    code.push('\n');
                }
            }
            if code.trim().is_empty() {
                return Err(CorpusError::SourceNotFound { template: template.id.clone(), include: "<no project header>".into() });
            }
            bundle.code_under_test = code;
            bundle.class_and_global_decls = decls.trim_end().to_string();
        }
    }
    Ok(bundle)
}

fn library_headers(t: &TestTemplate) -> Vec<String> {
    t.includes.iter().filter(|i| cxx::include_target(i).is_some_and(|(_, quoted)| !quoted)).cloned().collect()
}

/// Project headers reachable from the template's quoted includes,
/// transitively, relative to the root, in discovery order.
pub fn reachable_headers(m: &ProjectManifest, t: &TestTemplate) -> Result<Vec<PathBuf>> {
    let sources = m.source_files()?;
    let test_dir = t.source_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut out: Vec<PathBuf> = Vec::new();
    let mut queue: Vec<(PathBuf, String)> = t
        .includes
        .iter()
        .filter_map(|i| cxx::include_target(i))
        .filter(|(_, quoted)| *quoted)
        .map(|(target, _)| (test_dir.clone(), target))
        .collect();
    queue.reverse();
    while let Some((from_dir, target)) = queue.pop() {
        let resolved = resolve_include(m, &sources, &from_dir, &target)
            .ok_or_else(|| CorpusError::SourceNotFound { template: t.id.clone(), include: target.clone() })?;
        if out.contains(&resolved) {
            continue;
        }
        let text = read(&m.root.join(&resolved))?;
        let dir = resolved.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut nested: Vec<(PathBuf, String)> = cxx::include_directives(&text)
            .iter()
            .filter_map(|d| cxx::include_target(d))
            .filter(|(_, quoted)| *quoted)
            .map(|(target, _)| (dir.clone(), target))
            .collect();
        out.push(resolved);
        nested.reverse();
        queue.extend(nested);
    }
    Ok(out)
}

fn resolve_include(m: &ProjectManifest, sources: &[PathBuf], from_dir: &Path, target: &str) -> Option<PathBuf> {
    let candidate = normalize(&from_dir.join(target));
    if m.root.join(&candidate).is_file() {
        return Some(candidate);
    }
    if m.root.join(target).is_file() {
        return Some(normalize(Path::new(target)));
    }
    let name = Path::new(target).file_name()?;
    sources.iter().find(|s| s.ends_with(target) || s.file_name() == Some(name)).cloned()
}

fn normalize(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

/// Top-level declarations of a header: everything that is not a directive
/// or comment.
pub fn header_declarations(src: &str) -> String {
    let toks = cxx::tokenize(src);
    cxx::items(&toks, 0).iter().filter(|i| i.kind == ItemKind::Code).map(|i| i.text(src).to_string()).collect::<Vec<_>>().join("\n")
}

/// Template serialized as one JSON document per test.
pub fn templates_to_json(ts: &[TestTemplate]) -> BTreeMap<String, serde_json::Value> {
    ts.iter().map(|t| (t.id.clone(), serde_json::to_value(t).expect("template serializes"))).collect()
}
