//! End-to-end run: generation, fixing, build and run, coverage, smells,
//! parallelism, similarity and the consolidated report.
//!
//! Output directory layout:
//! `generation.jsonl` (prompts and candidates), `ledger.jsonl` (evaluation
//! records), `report.json`, `report.txt`, `clusters.json`,
//! `similarity.jsonl` and `artifacts/<candidate>/`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, ContextMode, ProjectManifest, TestTemplate};
use crate::coverage::{self, CoverageError};
use crate::diagnostics::{self, DistanceMode};
use crate::fixer::{self, FixContext, FixReport};
use crate::generator::{
    self, Candidate, EchoProvider, GenerationLedger, Generator, HttpProvider, MatrixSpec, MockProvider, PromptBundle, Provider,
    SamplingConfig, ENV_TOKEN, ENV_URL,
};
use crate::harness::{self, CompileStatus, Diagnostic, HarnessConfig, Job, Severity, Verdict};
use crate::ledger;
use crate::parallelism::{self, SourceProfile};
use crate::report::{self, AggregateSettings, ContextAwareOutcome, EvalRecord, RunReport, StageError, MANUAL};
use crate::smells::{self, SmellConfig, SymbolIndex};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown context mode `{0}`")]
    UnknownMode(String),
    #[error("unknown provider `{0}` (expected mock, http or echo)")]
    UnknownProvider(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("project: {0}")]
    Manifest(#[from] corpus::CorpusError),
    #[error("provider: {0}")]
    Provider(String),
    #[error("generation: {0}")]
    Generation(#[from] generator::GenError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Manifest(_) | PipelineError::Provider(_) => EXIT_CONFIG,
            _ => 1,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSection {
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: String,
    /// Response directory of the mock provider.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Endpoint of the HTTP provider; falls back to the environment.
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub id: Option<String>,
    /// Fixed answer of the echo provider.
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default = "default_provider_timeout")]
    pub timeout_secs: u64,
}

fn default_provider_timeout() -> u64 {
    120
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationSection {
    pub modes: Vec<String>,
    pub temperatures: Vec<f64>,
    pub candidates: usize,
    pub token_limit: u32,
    pub continue_truncated: bool,
    pub agent_temperature: f64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        GenerationSection {
            modes: ContextMode::ALL.iter().map(|m| m.as_str().to_string()).collect(),
            temperatures: vec![0.0, 0.2, 0.4],
            candidates: 10,
            token_limit: 2048,
            continue_truncated: true,
            agent_temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub coverage: bool,
    /// Evaluate the human-written tests as the `manual` configuration.
    pub gold: bool,
    pub context_aware: bool,
    pub jobs: Option<usize>,
    pub oversubscribe: bool,
    pub ranks: usize,
    pub threads: usize,
    pub build_timeout_secs: u64,
    pub run_timeout_secs: u64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            coverage: true,
            gold: true,
            context_aware: true,
            jobs: None,
            oversubscribe: false,
            ranks: 2,
            threads: 2,
            build_timeout_secs: 300,
            run_timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub k_max: usize,
    pub threshold: f64,
    pub distance: DistanceMode,
    pub top_terms: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { k_max: 10, threshold: diagnostics::DEFAULT_THRESHOLD, distance: DistanceMode::Tokens, top_terms: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmellSection {
    pub eager_threshold: usize,
    pub slow_threshold: f64,
}

impl Default for SmellSection {
    fn default() -> Self {
        let d = SmellConfig::default();
        SmellSection { eager_threshold: d.eager_threshold, slow_threshold: d.slow_threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub project: ProjectSection,
    pub provider: ProviderSection,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub smells: SmellSection,
    /// Output directory; defaults to `out` next to the config file.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory relative paths are resolved against. Not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub provider: Option<String>,
    pub modes: Option<Vec<String>>,
    pub temperatures: Option<Vec<f64>>,
    pub candidates: Option<usize>,
    pub token_limit: Option<u32>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: PipelineConfig = toml::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        PipelineConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        // `mock:<dir>`, `http:<url>` or a bare kind
        if let Some(p) = &o.provider {
            let (kind, arg) = match p.split_once(':') {
                Some((k, a)) if k == "mock" || k == "http" => (k, Some(a)),
                _ => (p.as_str(), None),
            };
            self.provider.kind = kind.to_string();
            match (kind, arg) {
                ("mock", Some(dir)) => self.provider.dir = Some(PathBuf::from(dir)),
                ("http", Some(url)) => self.provider.url = Some(url.to_string()),
                _ => {}
            }
        }
        if let Some(m) = &o.modes {
            self.generation.modes = m.clone();
        }
        if let Some(t) = &o.temperatures {
            self.generation.temperatures = t.clone();
        }
        if let Some(n) = o.candidates {
            self.generation.candidates = n;
        }
        if let Some(n) = o.token_limit {
            self.generation.token_limit = n;
        }
        if o.jobs.is_some() {
            self.evaluation.jobs = o.jobs;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        match &self.out {
            Some(o) => o.clone(),
            None => self.base_dir.join("out"),
        }
    }

    pub fn modes(&self) -> Result<Vec<ContextMode>, ConfigError> {
        let mut out = Vec::new();
        for m in &self.generation.modes {
            let mode: ContextMode = m.parse().map_err(|_| ConfigError::UnknownMode(m.clone()))?;
            if !out.contains(&mode) {
                out.push(mode);
            }
        }
        Ok(out)
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            temperature: 0.0,
            num_candidates: self.generation.candidates,
            token_limit: self.generation.token_limit,
            ..SamplingConfig::default()
        }
    }

    /// Everything checkable without touching the project or provider.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes()?.is_empty() {
            return Err(ConfigError::Invalid("no context modes".into()));
        }
        if self.generation.temperatures.is_empty() {
            return Err(ConfigError::Invalid("no temperatures".into()));
        }
        for &t in &self.generation.temperatures {
            self.sampling().at_temperature(t).validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if !(0.0..=1.0).contains(&self.diagnostics.threshold) {
            return Err(ConfigError::Invalid(format!("threshold {} outside [0, 1]", self.diagnostics.threshold)));
        }
        if self.diagnostics.k_max < 3 {
            return Err(ConfigError::Invalid("diagnostics.k_max must be at least 3".into()));
        }
        match self.provider.kind.as_str() {
            "mock" if self.provider.dir.is_none() => Err(ConfigError::Invalid("mock provider needs `dir`".into())),
            "mock" | "http" | "echo" => Ok(()),
            other => Err(ConfigError::UnknownProvider(other.into())),
        }
    }

    /// The config as written, minus the output location, for the report.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("out");
        }
        v
    }

    pub fn matrix_spec(&self, modes: Vec<ContextMode>, jobs: usize) -> MatrixSpec {
        MatrixSpec {
            modes,
            temperatures: self.generation.temperatures.clone(),
            cfg: self.sampling(),
            jobs,
            continue_truncated: self.generation.continue_truncated,
        }
    }

    pub fn harness(&self) -> HarnessConfig {
        HarnessConfig {
            build_timeout: Duration::from_secs(self.evaluation.build_timeout_secs),
            run_timeout: Duration::from_secs(self.evaluation.run_timeout_secs),
            ranks: self.evaluation.ranks,
            omp_threads: self.evaluation.threads,
            jobs: self.evaluation.jobs,
            oversubscribe: self.evaluation.oversubscribe,
            extra_flags: String::new(),
        }
    }

    pub fn smell_config(&self) -> SmellConfig {
        SmellConfig { eager_threshold: self.smells.eager_threshold, slow_threshold: self.smells.slow_threshold }
    }

    pub fn provider(&self) -> Result<Box<dyn Provider>> {
        let p = &self.provider;
        match p.kind.as_str() {
            "mock" => {
                let dir = self.resolve(p.dir.as_deref().ok_or_else(|| PipelineError::Provider("mock provider needs `dir`".into()))?);
                if !dir.is_dir() {
                    return Err(PipelineError::Provider(format!("mock directory {} not found", dir.display())));
                }
                let mut m = MockProvider::new(dir);
                if let Some(id) = &p.id {
                    m = m.with_id(id);
                }
                Ok(Box::new(m))
            }
            "echo" => Ok(Box::new(EchoProvider { text: p.text.clone().unwrap_or_default() })),
            "http" => {
                let url = p
                    .url
                    .clone()
                    .or_else(|| std::env::var(ENV_URL).ok())
                    .ok_or_else(|| PipelineError::Provider(format!("http provider needs `url` or {ENV_URL}")))?;
                let token = std::env::var(ENV_TOKEN).ok();
                Ok(Box::new(HttpProvider::new(p.id.as_deref().unwrap_or("http"), &url, token, Duration::from_secs(p.timeout_secs))))
            }
            other => Err(ConfigError::UnknownProvider(other.into()).into()),
        }
    }
}

/// What a finished run hands back.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: RunReport,
    pub exit_code: i32,
    pub out_dir: PathBuf,
}

/// Project data shared by every evaluation.
pub struct ProjectContext {
    pub manifest: ProjectManifest,
    pub templates: BTreeMap<String, TestTemplate>,
    pub production: Vec<String>,
    pub known_headers: BTreeSet<String>,
    pub symbols: SymbolIndex,
    pub profile: SourceProfile,
}

impl ProjectContext {
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = corpus::load_manifest(manifest_path)?;
        let templates = corpus::load_templates(&manifest)?.into_iter().map(|t| (t.id.clone(), t)).collect();
        let files: Vec<(PathBuf, String)> = manifest
            .source_files()?
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(manifest.root.join(&p))?;
                Ok((p, text))
            })
            .collect::<std::io::Result<_>>()?;
        let known_headers = files
            .iter()
            .filter(|(p, _)| p.extension().is_some_and(|e| e != "cpp" && e != "cc" && e != "cxx" && e != "c"))
            .filter_map(|(p, _)| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let symbols = SymbolIndex::build(files.iter().map(|(p, s)| (p.as_path(), s.as_str())));
        let profile = parallelism::analyze_source_parallelism(files.iter().map(|(p, s)| (p.as_path(), s.as_str())))
            .map_err(|e| PipelineError::Provider(format!("source analysis failed: {e}")))?;
        Ok(ProjectContext { manifest, templates, production: files.into_iter().map(|(_, s)| s).collect(), known_headers, symbols, profile })
    }

    fn fix_context<'a>(&'a self, prompt: Option<&'a PromptBundle>) -> FixContext<'a> {
        FixContext { prompt, production: &self.production, known_headers: Some(&self.known_headers), ..FixContext::default() }
    }
}

/// Compiler output carries temporary object names; they would make
/// records differ between identical runs.
fn stabilize(diags: &mut [Diagnostic]) {
    static TMP: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = TMP.get_or_init(|| Regex::new(r"/tmp/[^\s:()']+").unwrap());
    for d in diags {
        d.file = re.replace_all(&d.file, "<tmp>").into_owned();
        d.message = re.replace_all(&d.message, "<tmp>").into_owned();
    }
}

pub fn diagnostics_text(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| {
            let sev = match d.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            format!("{}:{}: {sev}: {}\n", d.file, d.line, d.message)
        })
        .collect()
}

fn artifact_dir(out: &Path, id: &str) -> PathBuf {
    out.join("artifacts").join(id)
}

struct Evaluator<'a> {
    cfg: &'a PipelineConfig,
    project: &'a ProjectContext,
    harness: HarnessConfig,
    smell_cfg: SmellConfig,
    generator: &'a Generator<'a>,
    /// Full-context prompts for feedback regeneration, by template.
    full_prompts: BTreeMap<String, Result<PromptBundle, String>>,
    prompts: &'a BTreeMap<String, PromptBundle>,
    out: &'a Path,
}

impl Evaluator<'_> {
    fn write(&self, id: &str, name: &str, text: &str, errors: &mut Vec<StageError>) {
        if let Err(e) = ledger::write_atomic(&artifact_dir(self.out, id).join(name), text.as_bytes()) {
            errors.push(StageError { stage: "artifacts".into(), message: e.to_string() });
        }
    }

    fn generated(&self, c: &Candidate) -> EvalRecord {
        let template = &self.project.templates[&c.template_id];
        let prompt = self.prompts.get(&c.prompt_ref);
        let (fixed, fix_report) = fixer::fix(c, template, &self.project.fix_context(prompt));
        let configuration = report::configuration_label(c.mode.as_str(), c.sampling.temperature);
        let mut errors = Vec::new();
        self.write(&c.id, "raw.txt", &c.raw_text, &mut errors);
        let mut rec = self.assess(&c.id, template, &fixed, &configuration, fix_report, errors);
        let (d, la, lb) = diagnostics::edit_distance(
            diagnostics::candidate_body(&fixed, template),
            &template.original_body,
            self.cfg.diagnostics.distance,
        );
        let sim = diagnostics::normalized_similarity(d, la, lb);
        rec.similarity = Some(diagnostics::SimilarityScore {
            gen_ref: c.id.clone(),
            gold_ref: template.id.clone(),
            edit_distance: d,
            normalized_similarity: sim,
            memorization_flag: sim >= self.cfg.diagnostics.threshold,
        });
        if !rec.compiled() && self.cfg.evaluation.context_aware {
            match self.regenerate(c, template, &rec.compile.diagnostics) {
                Ok(o) => rec.context_aware = Some(o),
                Err(e) => rec.stage_errors.push(StageError { stage: "context_aware".into(), message: e }),
            }
        }
        rec
    }

    fn regenerate(&self, c: &Candidate, template: &TestTemplate, diags: &[Diagnostic]) -> Result<ContextAwareOutcome, String> {
        let full = self.full_prompts.get(&template.id).ok_or("no full-context prompt")?.as_ref().map_err(|e| e.clone())?;
        let regen = self.generator.regenerate_with_feedback(full, c, &diagnostics_text(diags)).map_err(|e| e.to_string())?;
        let (fixed, fr) = fixer::fix(&regen, template, &self.project.fix_context(Some(full)));
        let mut errs = Vec::new();
        self.write(&c.id, "regenerated.txt", &regen.raw_text, &mut errs);
        self.write(&c.id, "regenerated_fixed.cpp", &fixed, &mut errs);
        if let Some(e) = errs.pop() {
            return Err(e.message);
        }
        let (outcome, _) =
            harness::compile(&self.project.manifest, &regen.id, &fixed, template, &self.harness).map_err(|e| e.to_string())?;
        Ok(ContextAwareOutcome {
            regenerated_ref: regen.id,
            compiled: outcome.status == CompileStatus::Success,
            applied_rules: fr.applied_rules,
        })
    }

    fn manual(&self, template: &TestTemplate) -> EvalRecord {
        let id = format!("{MANUAL}.{}", template.id);
        let mut errors = Vec::new();
        let text = match fs::read_to_string(self.project.manifest.root.join(&template.source_path)) {
            Ok(t) => t,
            Err(e) => {
                errors.push(StageError { stage: "manual".into(), message: e.to_string() });
                template.render()
            }
        };
        let fix_report = FixReport {
            candidate_ref: id.clone(),
            applied_rules: Vec::new(),
            before: text.clone(),
            after: text.clone(),
            unchanged: true,
            unfixable: false,
        };
        self.assess(&id, template, &text, MANUAL, fix_report, errors)
    }

    /// Build, run, coverage, smells and parallelism for one fixed text.
    fn assess(
        &self,
        id: &str,
        template: &TestTemplate,
        fixed: &str,
        configuration: &str,
        fix_report: FixReport,
        mut errors: Vec<StageError>,
    ) -> EvalRecord {
        let m = &self.project.manifest;
        self.write(id, "fixed.cpp", fixed, &mut errors);
        let job = Job { candidate_ref: id.to_string(), fixed: fixed.to_string(), template };
        let mut entry = harness::evaluate_one(m, &job, &self.harness);
        stabilize(&mut entry.compile.diagnostics);
        if let Some(e) = entry.error.take() {
            errors.push(StageError { stage: "harness".into(), message: e });
        }
        self.write(id, "diagnostics.txt", &diagnostics_text(&entry.compile.diagnostics), &mut errors);
        let compiled = entry.compile.status == CompileStatus::Success;
        let mut rec = EvalRecord {
            candidate_ref: id.to_string(),
            template_id: template.id.clone(),
            configuration: configuration.to_string(),
            fix_report,
            compile: entry.compile,
            verdict: entry.verdict,
            coverage: None,
            smells: Vec::new(),
            parallelism: None,
            similarity: None,
            context_aware: None,
            stage_errors: Vec::new(),
        };
        if compiled {
            if self.cfg.evaluation.coverage {
                match coverage::instrumented_build_and_run(m, id, fixed, template, &self.harness) {
                    Ok(c) => {
                        let json = serde_json::to_string_pretty(&c).expect("coverage serializes");
                        self.write(id, "coverage.json", &json, &mut errors);
                        rec.coverage = Some(c);
                    }
                    // a crashing or hanging test leaves no data behind
                    Err(CoverageError::NoCoverageEmitted(_)) if rec.verdict.verdict == Verdict::Failing => {}
                    Err(e) => errors.push(StageError { stage: "coverage".into(), message: e.to_string() }),
                }
            }
            match smells::detect(&template.source_path, fixed, &self.project.symbols, &self.smell_cfg) {
                Ok(s) => rec.smells = s,
                Err(e) => errors.push(StageError { stage: "smells".into(), message: e.to_string() }),
            }
            match parallelism::analyze_test_parallelism(&template.source_path, fixed, &self.project.profile) {
                Ok(p) => rec.parallelism = Some(p),
                Err(e) => errors.push(StageError { stage: "parallelism".into(), message: e.to_string() }),
            }
        }
        rec.stage_errors = errors;
        rec
    }
}

pub fn aggregate_settings(cfg: &PipelineConfig, provider: &str, generation_failures: usize) -> AggregateSettings {
    AggregateSettings {
        config: cfg.echo(),
        seed: cfg.seed,
        provider: provider.to_string(),
        threshold: cfg.diagnostics.threshold,
        distance: cfg.diagnostics.distance,
        k_max: cfg.diagnostics.k_max,
        top_terms: cfg.diagnostics.top_terms,
        generation_failures,
    }
}

/// Latest record per candidate.
pub fn load_records(path: &Path) -> std::io::Result<BTreeMap<String, EvalRecord>> {
    Ok(ledger::read::<EvalRecord>(path)?.into_iter().map(|r| (r.candidate_ref.clone(), r)).collect())
}

/// Writes report.json, report.txt, clusters.json and similarity.jsonl.
pub fn write_report(out: &Path, report: &RunReport, records: &BTreeMap<String, EvalRecord>) -> std::io::Result<()> {
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    ledger::write_atomic(&out.join("report.json"), json.as_bytes())?;
    ledger::write_atomic(&out.join("report.txt"), report::render_tables(report).as_bytes())?;
    let clusters = serde_json::to_string_pretty(&report.clusters).expect("clusters serialize") + "\n";
    ledger::write_atomic(&out.join("clusters.json"), clusters.as_bytes())?;
    let mut sims = String::new();
    for s in records.values().filter_map(|r| r.similarity.as_ref()) {
        sims.push_str(&serde_json::to_string(s).expect("score serializes"));
        sims.push('\n');
    }
    ledger::write_atomic(&out.join("similarity.jsonl"), sims.as_bytes())
}

/// Loads, overrides and runs.
pub fn run_pipeline_path(config: &Path, overrides: &Overrides) -> Result<PipelineOutcome> {
    let mut cfg = PipelineConfig::load(config)?;
    cfg.apply(overrides);
    run_pipeline(&cfg)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let modes = cfg.modes()?;
    let project = ProjectContext::load(&cfg.resolve(&cfg.project.manifest))?;
    let provider = cfg.provider()?;
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;

    let mut generator = Generator::new(provider.as_ref());
    generator.agent_temperature = cfg.generation.agent_temperature;
    let harness_cfg = cfg.harness();
    let jobs = harness_cfg.effective_jobs(&project.manifest);
    let templates: Vec<TestTemplate> = project.templates.values().cloned().collect();
    let spec = cfg.matrix_spec(modes, jobs);
    let gen_ledger: GenerationLedger =
        generator::run_matrix(&project.manifest, &templates, &generator, &spec, &out.join("generation.jsonl"))?;

    let full_prompts = templates
        .iter()
        .map(|t| {
            let p = corpus::build_context(&project.manifest, t, ContextMode::FullContext)
                .map_err(|e| e.to_string())
                .and_then(|b| generator::render_prompt(&b, ContextMode::FullContext).map_err(|e| e.to_string()));
            (t.id.clone(), p)
        })
        .collect();
    let ev = Evaluator {
        cfg,
        project: &project,
        harness: harness_cfg,
        smell_cfg: cfg.smell_config(),
        generator: &generator,
        full_prompts,
        prompts: &gen_ledger.prompts,
        out: &out,
    };

    let ledger_path = out.join("ledger.jsonl");
    let mut records = load_records(&ledger_path)?;
    enum Work<'a> {
        Generated(&'a Candidate),
        Manual(&'a TestTemplate),
    }
    let mut work: Vec<Work<'_>> = gen_ledger
        .candidates()
        .filter(|c| project.templates.contains_key(&c.template_id) && !records.contains_key(&c.id))
        .map(Work::Generated)
        .collect();
    if cfg.evaluation.gold {
        work.extend(templates.iter().filter(|t| !records.contains_key(&format!("{MANUAL}.{}", t.id))).map(Work::Manual));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| PipelineError::Io(std::io::Error::other(e)))?;
    for chunk in work.chunks(jobs) {
        let done: Vec<EvalRecord> = pool.install(|| {
            chunk
                .par_iter()
                .map(|w| match w {
                    Work::Generated(c) => ev.generated(c),
                    Work::Manual(t) => ev.manual(t),
                })
                .collect()
        });
        ledger::append(&ledger_path, &done)?;
        for r in done {
            log::info!("{}: {:?} / {:?}", r.candidate_ref, r.compile.status, r.verdict.verdict);
            records.insert(r.candidate_ref.clone(), r);
        }
    }

    let all: Vec<EvalRecord> = records.values().cloned().collect();
    let report = report::aggregate(&all, &aggregate_settings(cfg, provider.id(), gen_ledger.failed.len()));
    write_report(&out, &report, &records)?;
    let partial = !gen_ledger.failed.is_empty() || all.iter().any(|r| !r.stage_errors.is_empty());
    Ok(PipelineOutcome { report, exit_code: if partial { EXIT_PARTIAL } else { EXIT_OK }, out_dir: out })
}
