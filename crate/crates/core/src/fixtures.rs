//! Checks bundled fixture projects against their annotations.
//!
//! A fixture directory holds `manifest.toml`, `src/`, `tests/` and
//! `annotations.json`. Each annotated test must build and pass, and its
//! smells, parallelism report and per-file coverage counts must match.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{self, ProjectManifest, TestTemplate};
use crate::coverage;
use crate::harness::{self, HarnessConfig, Job, Verdict};
use crate::parallelism::{self, ParallelismReport};
use crate::process;
use crate::smells::{self, SmellConfig, SmellKind, SymbolIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCounts {
    pub lines_total: u64,
    pub lines_executed: u64,
    pub branches_total: u64,
    pub branches_executed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureAnnotation {
    pub file: PathBuf,
    pub expected_smells: Vec<(SmellKind, usize)>,
    pub expected_parallelism: ParallelismReport,
    pub expected_coverage: BTreeMap<String, LineCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureDrift {
    pub fixture: String,
    pub file: String,
    pub aspect: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for FixtureDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {} expected {} got {}", self.fixture, self.file, self.aspect, self.expected, self.actual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixtureStatus {
    Pass,
    Skipped { reason: String },
    Fail { drift: Vec<FixtureDrift> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub name: String,
    #[serde(flatten)]
    pub status: FixtureStatus,
}

/// Which checks to run. The static ones need no toolchain.
#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub build_and_run: bool,
    pub coverage: bool,
    pub harness: HarnessConfig,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            build_and_run: true,
            coverage: true,
            harness: HarnessConfig { ranks: 2, omp_threads: 2, ..HarnessConfig::default() },
        }
    }
}

pub fn load_annotations(dir: &Path) -> Result<Vec<FixtureAnnotation>, String> {
    let path = dir.join("annotations.json");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Fixture directories under `root`: those with both a manifest and
/// annotations.
pub fn discover(root: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(root)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join("manifest.toml").is_file() && p.join("annotations.json").is_file())
        .collect();
    out.sort();
    out
}

fn toolchain_missing(m: &ProjectManifest) -> Option<String> {
    let needed: &[&str] = if m.uses_mpi() { &["make", "mpicxx", "mpirun"] } else { &["make", "g++"] };
    needed.iter().find(|t| !process::on_path(t)).map(|t| format!("`{t}` not found on PATH"))
}

fn drift(fixture: &str, file: &Path, aspect: &str, expected: impl fmt::Debug, actual: impl fmt::Debug) -> FixtureDrift {
    FixtureDrift {
        fixture: fixture.into(),
        file: file.display().to_string(),
        aspect: aspect.into(),
        expected: format!("{expected:?}"),
        actual: format!("{actual:?}"),
    }
}

/// Static checks: annotated lines exist, smells and parallelism match.
pub fn check_static(name: &str, m: &ProjectManifest, notes: &[FixtureAnnotation]) -> Result<Vec<FixtureDrift>, String> {
    let sources: Vec<(PathBuf, String)> = m
        .source_files()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| fs::read_to_string(m.root.join(&p)).map(|s| (p, s)).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let index = SymbolIndex::build(sources.iter().map(|(p, s)| (p.as_path(), s.as_str())));
    let profile =
        parallelism::analyze_source_parallelism(sources.iter().map(|(p, s)| (p.as_path(), s.as_str()))).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for a in notes {
        let src = match fs::read_to_string(m.root.join(&a.file)) {
            Ok(s) => s,
            Err(e) => {
                out.push(drift(name, &a.file, "file", "readable", e.to_string()));
                continue;
            }
        };
        let n_lines = src.lines().count();
        for (kind, line) in &a.expected_smells {
            if *line == 0 || *line > n_lines {
                out.push(drift(name, &a.file, "annotated line", format!("{kind:?} at 1..={n_lines}"), line));
            }
        }
        let found: BTreeSet<(SmellKind, usize)> = smells::detect(&a.file, &src, &index, &SmellConfig::default())
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|f| (f.kind, f.line))
            .collect();
        let want: BTreeSet<(SmellKind, usize)> = a.expected_smells.iter().copied().collect();
        if found != want {
            let missing: Vec<_> = want.difference(&found).collect();
            let extra: Vec<_> = found.difference(&want).collect();
            out.push(drift(name, &a.file, "smells", missing, extra));
        }
        let got = parallelism::analyze_test_parallelism(&a.file, &src, &profile).map_err(|e| e.to_string())?;
        let cmp = parallelism::gold_comparison(&got, &a.expected_parallelism);
        if !cmp.matches {
            out.push(drift(name, &a.file, "parallelism", &a.expected_parallelism, cmp.deltas));
        }
    }
    Ok(out)
}

fn template_for<'a>(ts: &'a [TestTemplate], file: &Path) -> Option<&'a TestTemplate> {
    ts.iter().find(|t| t.source_path == file)
}

/// Build, run and coverage checks.
pub fn check_dynamic(
    name: &str,
    m: &ProjectManifest,
    notes: &[FixtureAnnotation],
    opts: &ValidateOptions,
) -> Result<Vec<FixtureDrift>, String> {
    let templates = corpus::load_templates(m).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for a in notes {
        let Some(t) = template_for(&templates, &a.file) else {
            out.push(drift(name, &a.file, "template", "a discovered test", "none"));
            continue;
        };
        let text = fs::read_to_string(m.root.join(&a.file)).map_err(|e| e.to_string())?;
        let id = format!("fixture.{}", t.id);
        let entry = harness::evaluate_one(m, &Job { candidate_ref: id.clone(), fixed: text.clone(), template: t }, &opts.harness);
        if entry.verdict.verdict != Verdict::FullyCorrect {
            let errs: Vec<String> = entry.compile.errors().map(|d| d.message.clone()).collect();
            out.push(drift(name, &a.file, "verdict", Verdict::FullyCorrect, (entry.verdict.verdict, errs, entry.error)));
            continue;
        }
        if opts.coverage {
            match coverage::instrumented_build_and_run(m, &id, &text, t, &opts.harness) {
                Ok(rep) => {
                    let got: BTreeMap<String, LineCounts> = rep
                        .per_file
                        .iter()
                        .map(|(f, c)| {
                            (
                                f.clone(),
                                LineCounts {
                                    lines_total: c.lines_total,
                                    lines_executed: c.lines_executed,
                                    branches_total: c.branches_total,
                                    branches_executed: c.branches_executed,
                                },
                            )
                        })
                        .collect();
                    if got != a.expected_coverage {
                        out.push(drift(name, &a.file, "coverage", &a.expected_coverage, got));
                    }
                }
                Err(e) => out.push(drift(name, &a.file, "coverage", "a report", e.to_string())),
            }
        }
    }
    Ok(out)
}

pub fn validate_fixture(dir: &Path, opts: &ValidateOptions) -> FixtureResult {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let fail = |msg: String| FixtureResult {
        name: name.clone(),
        status: FixtureStatus::Fail { drift: vec![drift(&name, Path::new("."), "load", "ok", msg)] },
    };
    let m = match corpus::load_manifest(&dir.join("manifest.toml")) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let notes = match load_annotations(dir) {
        Ok(n) => n,
        Err(e) => return fail(e),
    };
    let mut all = match check_static(&name, &m, &notes) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    if opts.build_and_run {
        if let Some(reason) = toolchain_missing(&m) {
            if all.is_empty() {
                log::warn!("{name}: skipping build checks: {reason}");
                return FixtureResult { name, status: FixtureStatus::Skipped { reason } };
            }
        } else {
            match check_dynamic(&name, &m, &notes, opts) {
                Ok(d) => all.extend(d),
                Err(e) => return fail(e),
            }
        }
    }
    let status = if all.is_empty() { FixtureStatus::Pass } else { FixtureStatus::Fail { drift: all } };
    FixtureResult { name, status }
}

/// Every fixture under `root`.
pub fn validate_fixtures(root: &Path, opts: &ValidateOptions) -> Vec<FixtureResult> {
    discover(root).iter().map(|d| validate_fixture(d, opts)).collect()
}
