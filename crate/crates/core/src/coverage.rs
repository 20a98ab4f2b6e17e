//! Line and branch coverage from gcov's annotated text output.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ProjectManifest, TestTemplate};
use crate::harness::{self, HarnessConfig, HarnessError, Sandbox};
use crate::process;

pub const INSTRUMENT_FLAGS: &str = "--coverage -O0";

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("instrumented build of {0} failed")]
    InstrumentationBuildFailed(String),
    #[error("no coverage data emitted for {0}")]
    NoCoverageEmitted(String),
    #[error("{file}:{line}: malformed coverage line: {text:?}")]
    MalformedLine { file: String, line: usize, text: String },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CoverageError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub lines_total: u64,
    pub lines_executed: u64,
    pub branches_total: u64,
    pub branches_executed: u64,
    pub line_pct: f64,
    pub branch_pct: f64,
    /// Set when there are no executable lines; `line_pct` is then 0.
    #[serde(default)]
    pub no_executable_lines: bool,
}

impl Counts {
    pub fn new(lines_total: u64, lines_executed: u64, branches_total: u64, branches_executed: u64) -> Self {
        Counts {
            lines_total,
            lines_executed,
            branches_total,
            branches_executed,
            line_pct: percent(lines_executed, lines_total),
            branch_pct: percent(branches_executed, branches_total),
            no_executable_lines: lines_total == 0,
        }
    }

    fn add(self, o: Counts) -> Counts {
        Counts::new(
            self.lines_total + o.lines_total,
            self.lines_executed + o.lines_executed,
            self.branches_total + o.branches_total,
            self.branches_executed + o.branches_executed,
        )
    }
}

pub fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub candidate_ref: String,
    #[serde(flatten)]
    pub total: Counts,
    pub per_file: BTreeMap<String, Counts>,
}

impl CoverageReport {
    pub fn from_files(candidate_ref: &str, per_file: BTreeMap<String, Counts>) -> Self {
        let total = per_file.values().fold(Counts::new(0, 0, 0, 0), |a, c| a.add(*c));
        CoverageReport { candidate_ref: candidate_ref.into(), total, per_file }
    }
}

/// Per-line data from one annotated file. `None` marks a non-executable line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotated {
    pub source: String,
    pub lines: BTreeMap<u32, Option<u64>>,
    /// Keyed by (line, branch index); the value is the taken count.
    pub branches: BTreeMap<(u32, u32), u64>,
}

impl Annotated {
    pub fn counts(&self) -> Counts {
        let exec: Vec<u64> = self.lines.values().filter_map(|c| *c).collect();
        Counts::new(
            exec.len() as u64,
            exec.iter().filter(|&&c| c > 0).count() as u64,
            self.branches.len() as u64,
            self.branches.values().filter(|&&c| c > 0).count() as u64,
        )
    }

    /// Sums counts from another translation unit's view of the same file.
    pub fn merge(&mut self, o: &Annotated) {
        for (&l, &c) in &o.lines {
            let e = self.lines.entry(l).or_insert(None);
            *e = match (*e, c) {
                (Some(a), Some(b)) => Some(a + b),
                (a, b) => a.or(b),
            };
        }
        for (&k, &c) in &o.branches {
            *self.branches.entry(k).or_insert(0) += c;
        }
    }
}

fn line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(-|#####|=====|\d+\*?)\s*:\s*(\d+):(.*)$").unwrap())
}

fn branch_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^branch\s+(\d+)\s+(?:taken\s+(\d+)(%)?(?:\s+\(.*\))?|never executed)\s*$").unwrap())
}

fn other_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:function\s|call\s+\d+\s|unconditional\s+\d+\s|-{5,}\s*$|\S[^:\s]*:\s*$|\s*$)").unwrap())
}

/// Parses one annotated file. Repeated line records (template
/// instantiation blocks) keep the first occurrence.
pub fn parse_file(name: &str, text: &str) -> Result<Annotated> {
    let mut out = Annotated { source: name.to_string(), ..Default::default() };
    let mut current: Option<u32> = None;
    let mut fresh = false;
    for (i, raw) in text.lines().enumerate() {
        let malformed = || CoverageError::MalformedLine { file: name.into(), line: i + 1, text: raw.into() };
        if let Some(c) = line_re().captures(raw) {
            let lineno: u32 = c[2].parse().map_err(|_| malformed())?;
            if lineno == 0 {
                if let Some(src) = c[3].strip_prefix("Source:") {
                    out.source = src.trim().to_string();
                }
                continue;
            }
            let count = match &c[1] {
                "-" => None,
                "#####" | "=====" => Some(0),
                n => Some(n.trim_end_matches('*').parse().map_err(|_| malformed())?),
            };
            current = Some(lineno);
            fresh = !out.lines.contains_key(&lineno);
            if fresh {
                out.lines.insert(lineno, count);
            }
        } else if let Some(c) = branch_re().captures(raw) {
            let line = current.ok_or_else(malformed)?;
            if fresh {
                let idx: u32 = c[1].parse().map_err(|_| malformed())?;
                let taken: u64 = c.get(2).map_or(Ok(0), |m| m.as_str().parse()).map_err(|_| malformed())?;
                out.branches.insert((line, idx), taken);
            }
        } else if !other_re().is_match(raw) {
            return Err(malformed());
        }
    }
    Ok(out)
}

/// Parses (name, text) pairs and aggregates them; files naming the same
/// source are merged first.
pub fn parse_annotated(candidate_ref: &str, files: &[(String, String)]) -> Result<CoverageReport> {
    let mut merged: BTreeMap<String, Annotated> = BTreeMap::new();
    for (name, text) in files {
        let a = parse_file(name, text)?;
        match merged.get_mut(&a.source) {
            Some(m) => m.merge(&a),
            None => {
                merged.insert(a.source.clone(), a);
            }
        }
    }
    Ok(CoverageReport::from_files(candidate_ref, merged.iter().map(|(k, a)| (k.clone(), a.counts())).collect()))
}

/// Renders a report as annotated files that parse back to the same counts.
/// Branches hang off the first executable line, so a file with branches
/// needs at least one.
pub fn synthesize(report: &CoverageReport) -> Vec<(String, String)> {
    report
        .per_file
        .iter()
        .map(|(name, c)| {
            let mut s = format!("        -:    0:Source:{name}\n        -:    0:Runs:1\n");
            let mut lineno = 1;
            let mut line = |s: &mut String, count: &str| {
                s.push_str(&format!("{count:>9}:{lineno:>5}:line {lineno}\n"));
                lineno += 1;
            };
            for i in 0..c.lines_total {
                let count = if i < c.lines_executed { "1" } else { "#####" };
                line(&mut s, count);
                if i == 0 {
                    for b in 0..c.branches_total {
                        if b < c.branches_executed {
                            s.push_str(&format!("branch {b:>2} taken 1\n"));
                        } else {
                            s.push_str(&format!("branch {b:>2} never executed\n"));
                        }
                    }
                }
                if i % 3 == 2 {
                    line(&mut s, "-");
                }
            }
            (format!("{}.gcov", name.rsplit('/').next().unwrap_or(name)), s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageDelta {
    pub line_pct: f64,
    pub branch_pct: f64,
    pub lines_executed: i64,
    pub branches_executed: i64,
    /// "higher", "lower" or "equal" for line then branch coverage.
    pub line_sign: String,
    pub branch_sign: String,
    pub files_compared: Vec<String>,
    pub only_in_generated: Vec<String>,
    pub only_in_gold: Vec<String>,
}

fn sign(d: f64) -> String {
    if d > 0.0 {
        "higher".into()
    } else if d < 0.0 {
        "lower".into()
    } else {
        "equal".into()
    }
}

/// Generated minus gold. Mismatched file sets are compared on their
/// intersection.
pub fn compare_to_gold(gen: &CoverageReport, gold: &CoverageReport) -> CoverageDelta {
    let a: BTreeSet<&String> = gen.per_file.keys().collect();
    let b: BTreeSet<&String> = gold.per_file.keys().collect();
    let (g, o) = if a == b {
        (gen.total, gold.total)
    } else {
        log::warn!("coverage file sets differ between {} and {}; comparing the intersection", gen.candidate_ref, gold.candidate_ref);
        let sum = |r: &CoverageReport| {
            r.per_file.iter().filter(|(k, _)| a.contains(k) && b.contains(k)).fold(Counts::new(0, 0, 0, 0), |x, (_, c)| x.add(*c))
        };
        (sum(gen), sum(gold))
    };
    let line_pct = g.line_pct - o.line_pct;
    let branch_pct = g.branch_pct - o.branch_pct;
    CoverageDelta {
        line_pct,
        branch_pct,
        lines_executed: g.lines_executed as i64 - o.lines_executed as i64,
        branches_executed: g.branches_executed as i64 - o.branches_executed as i64,
        line_sign: sign(line_pct),
        branch_sign: sign(branch_pct),
        files_compared: a.intersection(&b).map(|s| s.to_string()).collect(),
        only_in_generated: a.difference(&b).map(|s| s.to_string()).collect(),
        only_in_gold: b.difference(&a).map(|s| s.to_string()).collect(),
    }
}

/// Rebuilds the project with instrumentation in a fresh sandbox, runs the
/// test and collects gcov output for the production sources.
pub fn instrumented_build_and_run(
    m: &ProjectManifest,
    candidate_ref: &str,
    fixed: &str,
    template: &TestTemplate,
    cfg: &HarnessConfig,
) -> Result<CoverageReport> {
    let mut cfg = cfg.clone();
    cfg.extra_flags = format!("{} {INSTRUMENT_FLAGS}", cfg.extra_flags).trim().to_string();
    let sandbox = Sandbox::create(m)?;
    let (_, compiled) = harness::build_in(sandbox, m, candidate_ref, fixed, template, &cfg)?;
    let compiled = compiled.ok_or_else(|| CoverageError::InstrumentationBuildFailed(candidate_ref.into()))?;
    harness::run(m, &compiled, &cfg)?;
    let files = collect_gcov(m, compiled.sandbox.root())?;
    if files.is_empty() {
        return Err(CoverageError::NoCoverageEmitted(candidate_ref.into()));
    }
    parse_annotated(candidate_ref, &files)
}

/// Runs gcov for every data file under `root` and keeps the annotated
/// output of production sources.
pub fn collect_gcov(m: &ProjectManifest, root: &Path) -> Result<Vec<(String, String)>> {
    let sources = m.source_set().map_err(|e| CoverageError::NoCoverageEmitted(e.to_string()))?;
    let mut gcda: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "gcda"))
        .map(|e| e.into_path())
        .collect();
    gcda.sort();
    let out_dir = tempfile::tempdir()?;
    let mut files = Vec::new();
    for (i, data) in gcda.iter().enumerate() {
        let obj_dir = data.parent().unwrap_or(root);
        let argv = vec![
            "gcov".to_string(),
            "-b".into(),
            "-c".into(),
            "-o".into(),
            obj_dir.to_string_lossy().into_owned(),
            data.to_string_lossy().into_owned(),
        ];
        // gcov resolves sources against the build directory
        let out = process::run(&argv, root, &[], std::time::Duration::from_secs(60))?;
        if !out.success() {
            log::warn!("gcov failed on {}: {}", data.display(), out.stderr.trim());
            continue;
        }
        for entry in fs::read_dir(root)? {
            let p = entry?.path();
            if p.extension().is_some_and(|x| x == "gcov") {
                let text = fs::read_to_string(&p)?;
                fs::rename(&p, out_dir.path().join(format!("{i}-{}", p.file_name().unwrap().to_string_lossy())))?;
                let a = parse_file(&p.to_string_lossy(), &text)?;
                let rel = relative_source(&a.source, root);
                if sources.is_match(&rel) {
                    files.push((rel, text));
                }
            }
        }
    }
    Ok(files)
}

fn relative_source(source: &str, root: &Path) -> String {
    let p = Path::new(source);
    let rel = p.strip_prefix(root).unwrap_or(p);
    rel.to_string_lossy().trim_start_matches("./").to_string()
}
