//! Sandboxed compile and run of candidate tests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{AssertionStyle, ProjectManifest, TestTemplate};
use crate::process::{self, Exit};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("build system error: {0}")]
    BuildSystem(String),
    #[error("{0} timed out")]
    Timeout(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: usize,
    pub severity: Severity,
    pub message: String,
    pub normalized_message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileOutcome {
    pub candidate_ref: String,
    pub status: CompileStatus,
    pub diagnostics: Vec<Diagnostic>,
    /// Seconds. Left out of deterministic reports.
    pub wall_time: f64,
}

impl CompileOutcome {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FullyCorrect,
    SomewhatCorrect,
    Failing,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub candidate_ref: String,
    pub methods_total: usize,
    pub methods_passed: usize,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub timed_out: bool,
}

impl RunVerdict {
    pub fn not_run(candidate_ref: &str) -> Self {
        RunVerdict {
            candidate_ref: candidate_ref.into(),
            methods_total: 0,
            methods_passed: 0,
            verdict: Verdict::NotRun,
            exit_code: -1,
            timed_out: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub build_timeout: Duration,
    pub run_timeout: Duration,
    /// MPI ranks per run.
    pub ranks: usize,
    pub omp_threads: usize,
    /// Worker pool size; derived from host cores when `None`.
    pub jobs: Option<usize>,
    /// Allow `jobs * ranks * threads` above the host core count.
    pub oversubscribe: bool,
    /// Extra compiler flags passed through the manifest's flag variable.
    pub extra_flags: String,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            build_timeout: Duration::from_secs(300),
            run_timeout: Duration::from_secs(60),
            ranks: 2,
            omp_threads: 2,
            jobs: None,
            oversubscribe: false,
            extra_flags: String::new(),
        }
    }
}

impl HarnessConfig {
    fn width(&self, m: &ProjectManifest) -> usize {
        let ranks = if m.uses_mpi() { self.ranks.max(1) } else { 1 };
        ranks * self.omp_threads.max(1)
    }

    /// Worker count such that concurrent runs fit on the host.
    pub fn effective_jobs(&self, m: &ProjectManifest) -> usize {
        let fit = (process::host_cores() / self.width(m)).max(1);
        match self.jobs {
            Some(j) if self.oversubscribe => j.max(1),
            Some(j) if j > fit => {
                log::warn!("--jobs {j} would oversubscribe the host; using {fit}");
                fit
            }
            Some(j) => j.max(1),
            None => fit,
        }
    }

    fn build_env(&self, m: &ProjectManifest) -> Vec<(String, String)> {
        vec![(m.extra_flags_env.clone(), self.extra_flags.clone())]
    }

    fn run_env(&self) -> Vec<(String, String)> {
        vec![("OMP_NUM_THREADS".into(), self.omp_threads.to_string())]
    }
}

const SKIP_DIRS: &[&str] = &[".git", "build"];

/// A private copy of the project tree.
pub struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    pub fn create(m: &ProjectManifest) -> Result<Self> {
        let dir = tempfile::Builder::new().prefix("testgen-").tempdir()?;
        copy_tree(&m.root, dir.path())?;
        Ok(Sandbox { dir })
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }
}

fn copy_tree(from: &Path, to: &Path) -> io::Result<()> {
    let walker = walkdir::WalkDir::new(from)
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !(e.file_type().is_dir() && SKIP_DIRS.contains(&e.file_name().to_string_lossy().as_ref())));
    for entry in walker {
        let entry = entry.map_err(io::Error::other)?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest)?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &dest)?;
        }
    }
    Ok(())
}

/// SHA-256 over sorted relative paths and file contents.
pub fn tree_hash(root: &Path) -> io::Result<String> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        if entry.file_type().is_file() {
            files.push(entry.path().to_path_buf());
        }
    }
    let mut h = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(root).unwrap_or(&f);
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(&f)?);
        h.update([0]);
    }
    Ok(format!("{:x}", h.finalize()))
}

fn diag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?P<file>[^:\s][^:]*):(?P<line>\d+):(?:(?P<col>\d+):)?\s*(?P<sev>fatal error|error|warning):\s*(?P<msg>.*)$").unwrap()
    })
}

fn link_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?:^|: )(?P<file>[^:\s]+\.(?:cpp|cc|cxx|c|o)):?(?:\(\S+\))?: ?(?P<msg>(?:undefined reference to|multiple definition of).*)$",
        )
        .unwrap()
    })
}

/// GCC/Clang-style diagnostics plus linker errors. Notes are dropped.
pub fn parse_diagnostics(output: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for line in output.lines() {
        if let Some(c) = diag_re().captures(line) {
            let severity = if &c["sev"] == "warning" { Severity::Warning } else { Severity::Error };
            out.push(diagnostic(&c["file"], c["line"].parse().unwrap_or(0), severity, &c["msg"]));
        } else if let Some(c) = link_re().captures(line) {
            out.push(diagnostic(&c["file"], 0, Severity::Error, &c["msg"]));
        } else if line.contains("ld returned") && line.contains("error:") {
            out.push(diagnostic("ld", 0, Severity::Error, "ld returned 1 exit status"));
        }
    }
    out
}

fn diagnostic(file: &str, line: usize, severity: Severity, msg: &str) -> Diagnostic {
    Diagnostic { file: file.trim().into(), line, severity, message: msg.trim().into(), normalized_message: normalize_message(msg) }
}

/// Replaces quoted names, paths and numbers with placeholders.
pub fn normalize_message(msg: &str) -> String {
    static QUOTED: OnceLock<Regex> = OnceLock::new();
    static PATH: OnceLock<Regex> = OnceLock::new();
    static NUM: OnceLock<Regex> = OnceLock::new();
    let quoted = QUOTED.get_or_init(|| Regex::new(r"‘[^’]*’|'[^']*'|`[^'`]*'|\x22[^\x22]*\x22").unwrap());
    let path = PATH.get_or_init(|| Regex::new(r"[\w./+-]*/[\w./+-]+|\b[\w-]+\.(?:cpp|cc|cxx|hpp|hh|h|o)\b").unwrap());
    let num = NUM.get_or_init(|| Regex::new(r"\b\d+\b").unwrap());
    let s = quoted.replace_all(msg.trim(), "<id>");
    let s = path.replace_all(&s, "<path>");
    let s = num.replace_all(&s, "<num>");
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A built candidate, ready to run.
pub struct CompiledCandidate {
    pub candidate_ref: String,
    pub sandbox: Sandbox,
    pub binary: PathBuf,
    pub assertion_style: AssertionStyle,
}

/// Writes `fixed` over the template's file in a fresh sandbox and builds it.
pub fn compile(
    m: &ProjectManifest,
    candidate_ref: &str,
    fixed: &str,
    template: &TestTemplate,
    cfg: &HarnessConfig,
) -> Result<(CompileOutcome, Option<CompiledCandidate>)> {
    build_in(Sandbox::create(m)?, m, candidate_ref, fixed, template, cfg)
}

/// Like [`compile`] with a caller-provided sandbox, which is handed back
/// inside the compiled candidate on success.
pub fn build_in(
    sandbox: Sandbox,
    m: &ProjectManifest,
    candidate_ref: &str,
    fixed: &str,
    template: &TestTemplate,
    cfg: &HarnessConfig,
) -> Result<(CompileOutcome, Option<CompiledCandidate>)> {
    fs::write(sandbox.root().join(&template.source_path), fixed)?;
    let argv = m.build_argv(template.target());
    let out = process::run(&argv, sandbox.root(), &cfg.build_env(m), cfg.build_timeout)
        .map_err(|e| HarnessError::BuildSystem(format!("cannot run {:?}: {e}", argv[0])))?;
    if out.exit == Exit::TimedOut {
        return Err(HarnessError::Timeout(format!("build of {candidate_ref}")));
    }
    let diagnostics = parse_diagnostics(&out.combined());
    let binary = sandbox.root().join(m.binary_for(template.target()));
    let ok = out.success() && binary.exists();
    if !ok && !diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(HarnessError::BuildSystem(format!(
            "build of {candidate_ref} failed without compiler errors:\n{}",
            out.combined().trim_end()
        )));
    }
    let outcome = CompileOutcome {
        candidate_ref: candidate_ref.into(),
        status: if ok { CompileStatus::Success } else { CompileStatus::Failure },
        diagnostics,
        wall_time: out.elapsed.as_secs_f64(),
    };
    let compiled =
        ok.then(|| CompiledCandidate { candidate_ref: candidate_ref.into(), sandbox, binary, assertion_style: template.assertion_style });
    Ok((outcome, compiled))
}

/// Builds every human-written test once; a failure here is the build
/// system's, not a candidate's.
pub fn sanity_gate(m: &ProjectManifest, templates: &[TestTemplate], cfg: &HarnessConfig) -> Result<()> {
    let sandbox = Sandbox::create(m)?;
    for t in templates {
        let argv = m.build_argv(t.target());
        let out = process::run(&argv, sandbox.root(), &cfg.build_env(m), cfg.build_timeout)?;
        if !out.success() {
            return Err(HarnessError::BuildSystem(format!("human test {} does not build:\n{}", t.id, out.combined().trim_end())));
        }
    }
    Ok(())
}

pub fn run_argv(m: &ProjectManifest, binary: &Path, cfg: &HarnessConfig) -> Vec<String> {
    let mut argv = if m.launcher.is_empty() { Vec::new() } else { m.launcher_argv(cfg.ranks) };
    argv.push(binary.to_string_lossy().into_owned());
    argv
}

pub fn run(m: &ProjectManifest, compiled: &CompiledCandidate, cfg: &HarnessConfig) -> Result<RunVerdict> {
    let argv = run_argv(m, &compiled.binary, cfg);
    let out = process::run(&argv, compiled.sandbox.root(), &cfg.run_env(), cfg.run_timeout)?;
    Ok(verdict_from(&compiled.candidate_ref, compiled.assertion_style, &out))
}

/// Passed and failed method counts reported in the output, if any.
pub fn parse_methods(style: AssertionStyle, output: &str) -> Option<(usize, usize)> {
    match style {
        AssertionStyle::ExitCode => None,
        AssertionStyle::PrintPattern => {
            let ok = output.matches("completed successfully").count();
            let bad = output.matches("completed unsuccessfully").count();
            (ok + bad > 0).then_some((ok, bad))
        }
        AssertionStyle::AssertMacro => framework_summary(output),
    }
}

fn framework_summary(output: &str) -> Option<(usize, usize)> {
    static GTEST_PASSED: OnceLock<Regex> = OnceLock::new();
    static GTEST_FAILED: OnceLock<Regex> = OnceLock::new();
    static CASES: OnceLock<Regex> = OnceLock::new();
    static CATCH_ALL: OnceLock<Regex> = OnceLock::new();
    static CPPUNIT_OK: OnceLock<Regex> = OnceLock::new();
    static CPPUNIT_RUN: OnceLock<Regex> = OnceLock::new();
    let passed = GTEST_PASSED.get_or_init(|| Regex::new(r"(?m)^\[  PASSED  \] (\d+) tests?").unwrap());
    let failed = GTEST_FAILED.get_or_init(|| Regex::new(r"(?m)^\[  FAILED  \] (\d+) tests?, listed below").unwrap());
    if let Some(p) = passed.captures(output) {
        let f = failed.captures(output).map_or(0, |c| c[1].parse().unwrap_or(0));
        return Some((p[1].parse().unwrap_or(0), f));
    }
    // doctest and Catch2
    let cases = CASES.get_or_init(|| Regex::new(r"test cases:\s*(\d+)\s*\|\s*(\d+) passed(?:\s*\|\s*(\d+) failed)?").unwrap());
    if let Some(c) = cases.captures(output) {
        let ok: usize = c[2].parse().unwrap_or(0);
        let total: usize = c[1].parse().unwrap_or(ok);
        return Some((ok, total.saturating_sub(ok)));
    }
    let catch_all = CATCH_ALL.get_or_init(|| Regex::new(r"All tests passed \(\d+ assertions? in (\d+) test cases?\)").unwrap());
    if let Some(c) = catch_all.captures(output) {
        return Some((c[1].parse().unwrap_or(0), 0));
    }
    let ok = CPPUNIT_OK.get_or_init(|| Regex::new(r"(?m)^OK \((\d+)\)").unwrap());
    if let Some(c) = ok.captures(output) {
        return Some((c[1].parse().unwrap_or(0), 0));
    }
    let run = CPPUNIT_RUN.get_or_init(|| Regex::new(r"Run:\s*(\d+)\s+Failures?:\s*(\d+)\s+Errors?:\s*(\d+)").unwrap());
    if let Some(c) = run.captures(output) {
        let total: usize = c[1].parse().unwrap_or(0);
        let bad: usize = c[2].parse::<usize>().unwrap_or(0) + c[3].parse::<usize>().unwrap_or(0);
        return Some((total.saturating_sub(bad), bad));
    }
    None
}

/// Method counts and verdict from a finished run. A nonzero exit with no
/// failed method in the output counts as one more failed method.
pub fn verdict_from(candidate_ref: &str, style: AssertionStyle, out: &process::Output) -> RunVerdict {
    let exit_code = out.exit_code();
    let timed_out = out.exit == Exit::TimedOut;
    let (mut passed, mut failed) = match parse_methods(style, &out.combined()) {
        Some(counts) => counts,
        None => (usize::from(exit_code == 0), usize::from(exit_code != 0)),
    };
    if exit_code != 0 && failed == 0 {
        failed = 1;
    }
    if timed_out && style == AssertionStyle::ExitCode {
        passed = 0;
    }
    let total = passed + failed;
    let crashed = !matches!(out.exit, Exit::Code(_));
    let verdict = if crashed {
        Verdict::Failing
    } else if total > 0 && passed == total {
        Verdict::FullyCorrect
    } else if passed >= 1 {
        Verdict::SomewhatCorrect
    } else {
        Verdict::Failing
    };
    RunVerdict { candidate_ref: candidate_ref.into(), methods_total: total, methods_passed: passed, verdict, exit_code, timed_out }
}

/// Reruns a compiled test and reports whether every verdict matched.
pub fn determinism_gate(m: &ProjectManifest, compiled: &CompiledCandidate, cfg: &HarnessConfig, runs: usize) -> Result<bool> {
    let first = run(m, compiled, cfg)?;
    for _ in 1..runs {
        let v = run(m, compiled, cfg)?;
        if (v.verdict, v.methods_passed, v.methods_total) != (first.verdict, first.methods_passed, first.methods_total) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One fixed candidate to evaluate.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub candidate_ref: String,
    pub fixed: String,
    pub template: &'a TestTemplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub candidate_ref: String,
    pub compile: CompileOutcome,
    pub verdict: RunVerdict,
    /// Harness problems not attributable to the candidate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Compiles and runs every job in a bounded worker pool. Results come back
/// in job order.
pub fn evaluate_batch(m: &ProjectManifest, jobs: &[Job<'_>], cfg: &HarnessConfig) -> Vec<BatchEntry> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.effective_jobs(m)).build().expect("thread pool");
    pool.install(|| jobs.par_iter().map(|j| evaluate_one(m, j, cfg)).collect())
}

pub fn evaluate_one(m: &ProjectManifest, j: &Job<'_>, cfg: &HarnessConfig) -> BatchEntry {
    match compile(m, &j.candidate_ref, &j.fixed, j.template, cfg) {
        Ok((outcome, Some(compiled))) => {
            let (verdict, error) = match run(m, &compiled, cfg) {
                Ok(v) => (v, None),
                Err(e) => (RunVerdict::not_run(&j.candidate_ref), Some(e.to_string())),
            };
            BatchEntry { candidate_ref: j.candidate_ref.clone(), compile: outcome, verdict, error }
        }
        Ok((outcome, None)) => BatchEntry {
            candidate_ref: j.candidate_ref.clone(),
            compile: outcome,
            verdict: RunVerdict::not_run(&j.candidate_ref),
            error: None,
        },
        Err(e) => BatchEntry {
            candidate_ref: j.candidate_ref.clone(),
            compile: CompileOutcome {
                candidate_ref: j.candidate_ref.clone(),
                status: CompileStatus::Failure,
                diagnostics: Vec::new(),
                wall_time: 0.0,
            },
            verdict: RunVerdict::not_run(&j.candidate_ref),
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchRates {
    pub n: usize,
    pub pct_compilable: f64,
    pub pct_fully_correct: f64,
    /// Includes fully correct candidates.
    pub pct_somewhat_correct: f64,
}

pub fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn rates<'a>(entries: impl IntoIterator<Item = (&'a CompileOutcome, &'a RunVerdict)>) -> BatchRates {
    let mut n = 0;
    let mut compiled = 0;
    let mut fully = 0;
    let mut somewhat = 0;
    for (c, v) in entries {
        n += 1;
        compiled += usize::from(c.status == CompileStatus::Success);
        fully += usize::from(v.verdict == Verdict::FullyCorrect);
        somewhat += usize::from(matches!(v.verdict, Verdict::FullyCorrect | Verdict::SomewhatCorrect));
    }
    BatchRates { n, pct_compilable: pct(compiled, n), pct_fully_correct: pct(fully, n), pct_somewhat_correct: pct(somewhat, n) }
}

/// Diagnostics grouped by normalized message, most frequent first.
pub fn diagnostic_histogram<'a>(ds: impl IntoIterator<Item = &'a Diagnostic>) -> Vec<(String, usize)> {
    let mut m: BTreeMap<String, usize> = BTreeMap::new();
    for d in ds {
        *m.entry(d.normalized_message.clone()).or_default() += 1;
    }
    let mut v: Vec<(String, usize)> = m.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn output(exit: Exit, stdout: &str) -> process::Output {
        process::Output { exit, stdout: stdout.into(), stderr: String::new(), elapsed: Duration::ZERO }
    }

    #[test]
    fn parses_gcc_diagnostics() {
        let log = "tests/test_saxpy.cpp: In function 'int main()':\n\
tests/test_saxpy.cpp:12:3: error: 'CPPUNIT_ASSERT_MESSAGE' was not declared in this scope\n\
   12 |   CPPUNIT_ASSERT_MESSAGE(\"x\", ok);\n\
tests/test_saxpy.cpp:4:10: warning: unused variable 'k' [-Wunused-variable]\n\
tests/a.cpp:1:10: fatal error: foo.hpp: No such file or directory\n\
/usr/bin/ld: /tmp/ccX.o: in function `main':\n\
test_x.cpp:(.text+0x1d): undefined reference to `helper(int)'\n\
collect2: error: ld returned 1 exit status\n";
        let d = parse_diagnostics(log);
        assert_eq!(d.len(), 5, "{d:#?}");
        assert_eq!(d[0].file, "tests/test_saxpy.cpp");
        assert_eq!(d[0].line, 12);
        assert_eq!(d[0].severity, Severity::Error);
        assert_eq!(d[0].normalized_message, "<id> was not declared in this scope");
        assert_eq!(d[1].severity, Severity::Warning);
        assert_eq!(d[2].normalized_message, "<path>: No such file or directory");
        assert_eq!(d[3].normalized_message, "undefined reference to <id>");
        assert_eq!(d[4].file, "ld");
    }

    #[test]
    fn normalization_placeholders() {
        assert_eq!(
            normalize_message("‘omp_get_wtime’ was not declared in this scope; did you mean ‘omp_get_wtick’?"),
            "<id> was not declared in this scope; did you mean <id>?"
        );
        assert_eq!(normalize_message("expected 3 arguments, have 2"), "expected <num> arguments, have <num>");
        assert_eq!(normalize_message("in /usr/include/c++/12/bits/x.h here"), "in <path> here");
    }

    #[test]
    fn print_pattern_verdicts() {
        let all = "a: test_1 completed successfully.\na: test_2 completed successfully.\n";
        let v = verdict_from("c", AssertionStyle::PrintPattern, &output(Exit::Code(0), all));
        assert_eq!((v.verdict, v.methods_passed, v.methods_total), (Verdict::FullyCorrect, 2, 2));
        let one_bad = "a: test_1 completed successfully.\na: test_2 completed unsuccessfully.\n";
        let v = verdict_from("c", AssertionStyle::PrintPattern, &output(Exit::Code(0), one_bad));
        assert_eq!((v.verdict, v.methods_passed, v.methods_total), (Verdict::SomewhatCorrect, 1, 2));
        let v = verdict_from("c", AssertionStyle::PrintPattern, &output(Exit::Code(2), all));
        assert_eq!((v.verdict, v.methods_passed, v.methods_total), (Verdict::SomewhatCorrect, 2, 3));
    }

    #[test]
    fn exit_code_verdicts() {
        let v = verdict_from("c", AssertionStyle::ExitCode, &output(Exit::Code(0), ""));
        assert_eq!(v.verdict, Verdict::FullyCorrect);
        let v = verdict_from("c", AssertionStyle::ExitCode, &output(Exit::TimedOut, ""));
        assert_eq!((v.verdict, v.timed_out, v.exit_code), (Verdict::Failing, true, 124));
        let v = verdict_from("c", AssertionStyle::ExitCode, &output(Exit::Signal(11), ""));
        assert_eq!((v.verdict, v.exit_code), (Verdict::Failing, 139));
    }

    #[test]
    fn framework_summaries() {
        assert_eq!(framework_summary("[  PASSED  ] 3 tests.\n"), Some((3, 0)));
        assert_eq!(framework_summary("[  PASSED  ] 2 tests.\n[  FAILED  ] 1 test, listed below:\n"), Some((2, 1)));
        assert_eq!(framework_summary("[doctest] test cases: 4 | 3 passed | 1 failed | 0 skipped"), Some((3, 1)));
        assert_eq!(framework_summary("All tests passed (12 assertions in 3 test cases)"), Some((3, 0)));
        assert_eq!(framework_summary("OK (5)\n"), Some((5, 0)));
        assert_eq!(framework_summary("Run: 4   Failures: 1   Errors: 0"), Some((3, 1)));
        assert_eq!(framework_summary("nothing"), None);
    }

    #[test]
    fn rate_arithmetic() {
        let ok = CompileOutcome { candidate_ref: "a".into(), status: CompileStatus::Success, diagnostics: vec![], wall_time: 0.0 };
        let bad = CompileOutcome { status: CompileStatus::Failure, ..ok.clone() };
        let pass = RunVerdict {
            candidate_ref: "a".into(),
            methods_total: 1,
            methods_passed: 1,
            verdict: Verdict::FullyCorrect,
            exit_code: 0,
            timed_out: false,
        };
        let nr = RunVerdict::not_run("a");
        let mut v = vec![(ok.clone(), pass.clone()); 3];
        v.extend(vec![(bad.clone(), nr.clone()); 7]);
        let r = rates(v.iter().map(|(c, v)| (c, v)));
        assert_eq!(r.pct_compilable, 30.0);
        assert_eq!(r.pct_fully_correct, 30.0);
        let all = vec![(ok, pass); 4];
        let r = rates(all.iter().map(|(c, v)| (c, v)));
        assert_eq!((r.pct_compilable, r.pct_fully_correct, r.pct_somewhat_correct), (100.0, 100.0, 100.0));
    }

    #[test]
    fn tree_hash_tracks_content() {
        let d = tempfile::tempdir().unwrap();
        fs::write(d.path().join("a"), "1").unwrap();
        let h1 = tree_hash(d.path()).unwrap();
        assert_eq!(h1, tree_hash(d.path()).unwrap());
        fs::write(d.path().join("a"), "2").unwrap();
        assert_ne!(h1, tree_hash(d.path()).unwrap());
    }
}
