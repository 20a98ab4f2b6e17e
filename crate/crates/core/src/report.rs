//! Per-candidate evaluation records, their aggregates and the text tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageReport;
use crate::diagnostics::{self, ClusterReport, DistanceMode, SimilarityScore};
use crate::fixer::FixReport;
use crate::harness::{pct, CompileOutcome, CompileStatus, RunVerdict, Severity, Verdict};
use crate::parallelism::{gold_comparison, DataType, ParallelismReport};
use crate::smells::{distribution, SmellDistribution, SmellFinding, SmellKind};

/// Configuration label of human-written tests.
pub const MANUAL: &str = "manual";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Result of regenerating a failing candidate with full context and its
/// compiler output in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextAwareOutcome {
    pub regenerated_ref: String,
    pub compiled: bool,
    pub applied_rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub candidate_ref: String,
    pub template_id: String,
    /// `<mode>@t<temperature>`, or `manual` for the human-written test.
    pub configuration: String,
    pub fix_report: FixReport,
    pub compile: CompileOutcome,
    pub verdict: RunVerdict,
    pub coverage: Option<CoverageReport>,
    pub smells: Vec<SmellFinding>,
    pub parallelism: Option<ParallelismReport>,
    pub similarity: Option<SimilarityScore>,
    #[serde(default)]
    pub context_aware: Option<ContextAwareOutcome>,
    #[serde(default)]
    pub stage_errors: Vec<StageError>,
}

impl EvalRecord {
    pub fn compiled(&self) -> bool {
        self.compile.status == CompileStatus::Success
    }

    /// Coverage only with a successful compile; NotRun exactly when the
    /// compile failed.
    pub fn consistent(&self) -> bool {
        (self.coverage.is_none() || self.compiled()) && ((self.verdict.verdict == Verdict::NotRun) == !self.compiled())
    }
}

pub fn configuration_label(mode: &str, temperature: f64) -> String {
    format!("{mode}@t{temperature}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelismSummary {
    /// Records with a parallelism report.
    pub n: usize,
    /// Percentage of those records with each flag set (`datatype_*` for
    /// covered types).
    pub pct: BTreeMap<String, f64>,
    /// Percentage whose report equals the human test's for the same template.
    pub pct_match_gold: Option<f64>,
}

pub const PARALLELISM_COLUMNS: [&str; 11] = [
    "has_memory_copy_test",
    "has_reduction_test",
    "has_atomic_test",
    "self_contained",
    "exit_code_contract",
    "thread_count_independent",
    "nested_regions_tested",
    "datatype_float",
    "datatype_double",
    "datatype_complex_double",
    "datatype_other",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigAggregate {
    pub configuration: String,
    pub n: usize,
    pub n_compiled: usize,
    pub pct_compilable: f64,
    /// Share of initially failing candidates that compiled after
    /// regeneration; `None` when none were regenerated.
    pub pct_context_aware: Option<f64>,
    pub pct_fully_correct: f64,
    pub pct_somewhat_correct: f64,
    pub mean_line_cov: Option<f64>,
    pub mean_branch_cov: Option<f64>,
    pub smell_distribution: SmellDistribution,
    pub parallelism: ParallelismSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorizationCell {
    pub configuration: String,
    pub n_scored: usize,
    pub n_flagged: usize,
    pub pct_flagged: f64,
    pub mean_similarity: Option<f64>,
    pub max_similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorizationSummary {
    pub threshold: f64,
    pub distance: DistanceMode,
    pub per_configuration: Vec<MemorizationCell>,
    pub flagged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub provider: String,
    pub records: usize,
    pub generation_failures: usize,
    pub stage_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: serde_json::Value,
    pub configurations: Vec<ConfigAggregate>,
    pub clusters: Option<ClusterReport>,
    pub memorization: MemorizationSummary,
    pub provenance: Provenance,
}

/// Settings the aggregation needs besides the records.
#[derive(Debug, Clone)]
pub struct AggregateSettings {
    pub config: serde_json::Value,
    pub seed: u64,
    pub provider: String,
    pub threshold: f64,
    pub distance: DistanceMode,
    /// Largest k tried by the elbow search.
    pub k_max: usize,
    pub top_terms: usize,
    pub generation_failures: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn datatype_key(t: DataType) -> &'static str {
    match t {
        DataType::Float => "datatype_float",
        DataType::Double => "datatype_double",
        DataType::ComplexDouble => "datatype_complex_double",
        DataType::Other => "datatype_other",
    }
}

fn parallelism_summary(records: &[&EvalRecord], gold: &BTreeMap<&str, &ParallelismReport>) -> ParallelismSummary {
    let reports: Vec<(&EvalRecord, &ParallelismReport)> = records.iter().filter_map(|r| r.parallelism.as_ref().map(|p| (*r, p))).collect();
    let n = reports.len();
    let mut counts: BTreeMap<String, usize> = PARALLELISM_COLUMNS.iter().map(|c| (c.to_string(), 0)).collect();
    for (_, p) in &reports {
        let on = [
            ("has_memory_copy_test", p.has_memory_copy_test),
            ("has_reduction_test", p.has_reduction_test),
            ("has_atomic_test", p.has_atomic_test),
            ("self_contained", p.self_contained),
            ("exit_code_contract", p.exit_code_contract),
            ("thread_count_independent", p.thread_count_independent),
            ("nested_regions_tested", p.nested_regions_tested),
        ];
        for (k, v) in on {
            *counts.get_mut(k).unwrap() += usize::from(v);
        }
        for t in &p.datatypes_covered {
            *counts.get_mut(datatype_key(*t)).unwrap() += 1;
        }
    }
    let compared: Vec<bool> =
        reports.iter().filter_map(|(r, p)| gold.get(r.template_id.as_str()).map(|g| gold_comparison(p, g).matches)).collect();
    ParallelismSummary {
        n,
        pct: counts.into_iter().map(|(k, c)| (k, pct(c, n))).collect(),
        pct_match_gold: if compared.is_empty() { None } else { Some(pct(compared.iter().filter(|m| **m).count(), compared.len())) },
    }
}

/// Column order: generated configurations sorted by label, then manual.
fn configuration_order(records: &[EvalRecord]) -> Vec<String> {
    let set: BTreeSet<&str> = records.iter().map(|r| r.configuration.as_str()).collect();
    let mut out: Vec<String> = set.iter().filter(|c| **c != MANUAL).map(|c| c.to_string()).collect();
    if set.contains(MANUAL) {
        out.push(MANUAL.into());
    }
    out
}

pub fn aggregate_configuration(configuration: &str, records: &[&EvalRecord], gold: &BTreeMap<&str, &ParallelismReport>) -> ConfigAggregate {
    let n = records.len();
    let n_compiled = records.iter().filter(|r| r.compiled()).count();
    let regenerated: Vec<&ContextAwareOutcome> =
        records.iter().filter(|r| !r.compiled()).filter_map(|r| r.context_aware.as_ref()).collect();
    let fully = records.iter().filter(|r| r.verdict.verdict == Verdict::FullyCorrect).count();
    let somewhat = records.iter().filter(|r| matches!(r.verdict.verdict, Verdict::FullyCorrect | Verdict::SomewhatCorrect)).count();
    let covs: Vec<&CoverageReport> = records.iter().filter_map(|r| r.coverage.as_ref()).collect();
    let smells: Vec<&[SmellFinding]> = records.iter().filter(|r| r.compiled()).map(|r| r.smells.as_slice()).collect();
    ConfigAggregate {
        configuration: configuration.to_string(),
        n,
        n_compiled,
        pct_compilable: pct(n_compiled, n),
        pct_context_aware: if regenerated.is_empty() {
            None
        } else {
            Some(pct(regenerated.iter().filter(|c| c.compiled).count(), regenerated.len()))
        },
        pct_fully_correct: pct(fully, n),
        pct_somewhat_correct: pct(somewhat, n),
        mean_line_cov: mean(&covs.iter().map(|c| c.total.line_pct).collect::<Vec<_>>()),
        mean_branch_cov: mean(&covs.iter().map(|c| c.total.branch_pct).collect::<Vec<_>>()),
        smell_distribution: distribution(smells),
        parallelism: parallelism_summary(records, gold),
    }
}

/// Error diagnostics of generated candidates, keyed `<candidate>#<n>`.
pub fn error_messages(records: &[EvalRecord]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for r in records.iter().filter(|r| r.configuration != MANUAL) {
        for (i, d) in r.compile.diagnostics.iter().filter(|d| d.severity == Severity::Error).enumerate() {
            out.insert(format!("{}#{i}", r.candidate_ref), d.normalized_message.clone());
        }
    }
    out
}

/// k-means over the error messages with an elbow-selected k. `None` with
/// fewer than three messages.
pub fn cluster_errors(records: &[EvalRecord], seed: u64, k_max: usize, top_terms: usize) -> Option<ClusterReport> {
    let messages = error_messages(records);
    let n = messages.len();
    if n < 3 {
        return None;
    }
    let vectors = diagnostics::vectorize(messages.iter().map(|(r, m)| (r.clone(), m.as_str()))).ok()?;
    let ks: Vec<usize> = (1..=k_max.min(n)).collect();
    let k = diagnostics::select_k(&vectors, &ks, seed).map(|e| e.k).ok()?;
    let model = diagnostics::kmeans(&vectors, k, seed).ok()?;
    Some(diagnostics::cluster_report(&model, &vectors, &messages, top_terms))
}

pub fn memorization_summary(records: &[EvalRecord], order: &[String], threshold: f64, distance: DistanceMode) -> MemorizationSummary {
    let per_configuration = order
        .iter()
        .filter(|c| c.as_str() != MANUAL)
        .map(|c| {
            let sims: Vec<f64> = records
                .iter()
                .filter(|r| &r.configuration == c)
                .filter_map(|r| r.similarity.as_ref())
                .map(|s| s.normalized_similarity)
                .collect();
            let flagged = records
                .iter()
                .filter(|r| &r.configuration == c)
                .filter(|r| r.similarity.as_ref().is_some_and(|s| s.memorization_flag))
                .count();
            MemorizationCell {
                configuration: c.clone(),
                n_scored: sims.len(),
                n_flagged: flagged,
                pct_flagged: pct(flagged, sims.len()),
                mean_similarity: mean(&sims),
                max_similarity: sims.iter().copied().reduce(f64::max),
            }
        })
        .collect();
    MemorizationSummary {
        threshold,
        distance,
        per_configuration,
        flagged: records
            .iter()
            .filter(|r| r.similarity.as_ref().is_some_and(|s| s.memorization_flag))
            .map(|r| r.candidate_ref.clone())
            .collect(),
    }
}

/// Builds the whole report from records alone. Record order does not
/// matter.
pub fn aggregate(records: &[EvalRecord], s: &AggregateSettings) -> RunReport {
    let mut records = records.to_vec();
    records.sort_by(|a, b| a.candidate_ref.cmp(&b.candidate_ref));
    let order = configuration_order(&records);
    let gold: BTreeMap<&str, &ParallelismReport> = records
        .iter()
        .filter(|r| r.configuration == MANUAL)
        .filter_map(|r| r.parallelism.as_ref().map(|p| (r.template_id.as_str(), p)))
        .collect();
    let configurations = order
        .iter()
        .map(|c| {
            let rs: Vec<&EvalRecord> = records.iter().filter(|r| &r.configuration == c).collect();
            let g = if c == MANUAL { BTreeMap::new() } else { gold.clone() };
            aggregate_configuration(c, &rs, &g)
        })
        .collect();
    RunReport {
        config: s.config.clone(),
        configurations,
        clusters: cluster_errors(&records, s.seed, s.k_max, s.top_terms),
        memorization: memorization_summary(&records, &order, s.threshold, s.distance),
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: s.seed,
            provider: s.provider.clone(),
            records: records.len(),
            generation_failures: s.generation_failures,
            stage_failures: records.iter().filter(|r| !r.stage_errors.is_empty()).count(),
        },
    }
}

fn fmt_pct(x: f64) -> String {
    format!("{x:.1}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_pct).unwrap_or_else(|| "-".into())
}

fn numeric(c: &str) -> bool {
    c == "-" || c.parse::<f64>().is_ok()
}

/// Plain text table. Columns whose cells are all numbers (or `-`) are
/// right-aligned.
fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> =
        (0..header.len()).map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0)).collect();
    let right: Vec<bool> = (0..header.len()).map(|i| !rows.is_empty() && rows.iter().all(|r| numeric(&r[i]))).collect();
    let line = |cells: &[String]| -> String {
        let s = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if right[i] { format!("{c:>w$}", w = widths[i]) } else { format!("{c:<w$}", w = widths[i]) })
            .collect::<Vec<_>>()
            .join(" | ");
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    out.push('\n');
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Compilation, correctness, coverage and smell tables followed by the
/// parallelism, memorization and error-cluster sections.
pub fn render_tables(report: &RunReport) -> String {
    let mut out = String::new();
    let cs = &report.configurations;
    table(
        &mut out,
        "Compilation",
        &strings(&["Configuration", "% Compilable", "% Context Aware"]),
        &cs.iter().map(|c| vec![c.configuration.clone(), fmt_pct(c.pct_compilable), fmt_opt(c.pct_context_aware)]).collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Correctness",
        &strings(&["Configuration", "Fully", "Somewhat"]),
        &cs.iter()
            .map(|c| vec![c.configuration.clone(), fmt_pct(c.pct_fully_correct), fmt_pct(c.pct_somewhat_correct)])
            .collect::<Vec<_>>(),
    );
    table(
        &mut out,
        "Coverage",
        &strings(&["Configuration", "Line", "Branch"]),
        &cs.iter().map(|c| vec![c.configuration.clone(), fmt_opt(c.mean_line_cov), fmt_opt(c.mean_branch_cov)]).collect::<Vec<_>>(),
    );
    let mut header = vec!["Smell".to_string()];
    header.extend(cs.iter().map(|c| c.configuration.clone()));
    let rows: Vec<Vec<String>> = SmellKind::ALL
        .iter()
        .map(|k| {
            let mut row = vec![format!("{} {}", k.code(), k.name())];
            row.extend(cs.iter().map(|c| fmt_pct(c.smell_distribution.per_kind.get(k).copied().unwrap_or(0.0))));
            row
        })
        .collect();
    table(&mut out, "Test smells (% of compilable tests)", &header, &rows);

    let mut header = vec!["Flag".to_string()];
    header.extend(cs.iter().map(|c| c.configuration.clone()));
    let mut rows: Vec<Vec<String>> = PARALLELISM_COLUMNS
        .iter()
        .map(|f| {
            let mut row = vec![f.to_string()];
            row.extend(cs.iter().map(|c| if c.parallelism.n == 0 { "-".into() } else { fmt_pct(c.parallelism.pct[*f]) }));
            row
        })
        .collect();
    let mut gold_row = vec!["matches_manual".to_string()];
    gold_row.extend(cs.iter().map(|c| fmt_opt(c.parallelism.pct_match_gold)));
    rows.push(gold_row);
    table(&mut out, "Parallelism (% of compilable tests)", &header, &rows);

    let m = &report.memorization;
    let title = format!(
        "Memorization (threshold {:.2}, {} distance)",
        m.threshold,
        match m.distance {
            DistanceMode::Tokens => "token",
            DistanceMode::Chars => "character",
        }
    );
    table(
        &mut out,
        &title,
        &strings(&["Configuration", "Scored", "Flagged", "% Flagged", "Mean sim", "Max sim"]),
        &m.per_configuration
            .iter()
            .map(|c| {
                vec![
                    c.configuration.clone(),
                    c.n_scored.to_string(),
                    c.n_flagged.to_string(),
                    fmt_pct(c.pct_flagged),
                    c.mean_similarity.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into()),
                    c.max_similarity.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect::<Vec<_>>(),
    );

    match &report.clusters {
        Some(cl) => table(
            &mut out,
            &format!("Compiler error clusters (k = {}, silhouette {:.3})", cl.k, cl.silhouette),
            &strings(&["Cluster", "Size", "Top terms", "Exemplar"]),
            &cl.clusters
                .iter()
                .map(|c| vec![c.id.to_string(), c.size.to_string(), c.top_terms.join(" "), c.exemplar_message.clone()])
                .collect::<Vec<_>>(),
        ),
        None => out.push_str("Compiler error clusters: fewer than 3 error messages\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let mut s = String::new();
        table(&mut s, "T", &strings(&["a", "bb", "c"]), &[strings(&["xyz", "1", "p"]), strings(&["w", "-", "qq"])]);
        assert_eq!(s, "T\na   | bb | c\n----+----+---\nxyz |  1 | p\nw   |  - | qq\n\n");
    }

    #[test]
    fn labels() {
        assert_eq!(configuration_label("no_context", 0.0), "no_context@t0");
        assert_eq!(configuration_label("full_context", 0.2), "full_context@t0.2");
    }
}
