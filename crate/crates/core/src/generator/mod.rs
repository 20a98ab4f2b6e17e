//! Prompt rendering and candidate sampling.

mod provider;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use provider::{
    temperature_dir, Completion, CompletionRequest, EchoProvider, HttpProvider, MockProvider, Provider, ProviderError, RequestKey,
    RequestKind, StopReason, ENV_TOKEN, ENV_URL,
};

use crate::corpus::{self, ContextBundle, ContextMode, ProjectManifest, TestTemplate};
use crate::{cxx, ledger};

pub const INSTRUCTION: &str = "Write a unit test for the following code using the provided headers.";
pub const CONTINUE_INSTRUCTION: &str = "Continue the code exactly where it stopped.";
pub const FEEDBACK_INSTRUCTION: &str = "The test above does not compile. Compiler output:";
pub const MAX_CONTINUATIONS: u32 = 2;
pub const MIN_TOKEN_LIMIT: u32 = 256;
/// Lines of the truncated candidate handed back as completion context.
const CONTINUATION_TAIL_LINES: usize = 40;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
    #[error("provider `{provider}` does not support {strategy:?} sampling")]
    UnsupportedStrategy { provider: String, strategy: Strategy },
    #[error("context mode mismatch: bundle is {bundle}, requested {requested}")]
    ModeMismatch { bundle: ContextMode, requested: ContextMode },
    #[error("provider timeout after {attempts} attempts: {message}")]
    ProviderTimeout { attempts: u32, message: String },
    #[error("provider rejected request after {attempts} attempts: {message}")]
    ProviderRejected { attempts: u32, message: String },
    #[error("request budget exhausted")]
    BudgetExceeded,
    #[error("candidate {0} is not truncated")]
    NotTruncated(String),
    #[error("candidate {} still truncated after {} continuation rounds", .0.id, .0.continuation_rounds)]
    StillTruncated(Box<Candidate>),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error("ledger: {0}")]
    Ledger(#[from] std::io::Error),
}

pub type Result<T, E = GenError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Beam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub temperature: f64,
    pub num_candidates: usize,
    pub token_limit: u32,
    pub strategy: Strategy,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { temperature: 0.0, num_candidates: 10, token_limit: 2048, strategy: Strategy::Random }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GenError::InvalidConfig(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.num_candidates == 0 {
            return Err(GenError::InvalidConfig("num_candidates must be at least 1".into()));
        }
        if self.token_limit < MIN_TOKEN_LIMIT {
            return Err(GenError::InvalidConfig(format!("token_limit {} below {MIN_TOKEN_LIMIT}", self.token_limit)));
        }
        Ok(())
    }

    pub fn at_temperature(&self, t: f64) -> Self {
        SamplingConfig { temperature: t, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub role: Role,
    pub text: String,
}

impl Exchange {
    pub fn new(role: Role, text: impl Into<String>) -> Self {
        Exchange { role, text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub id: String,
    pub mode: ContextMode,
    pub rendered_prompt: String,
    pub memory: Vec<Exchange>,
    pub template_ref: String,
    /// The template prefix, kept so fixers can tell prompt echo from context echo.
    pub template_prefix: String,
}

pub fn prompt_id(template_id: &str, mode: ContextMode) -> String {
    format!("{template_id}.{mode}")
}

pub fn render_prompt(bundle: &ContextBundle, mode: ContextMode) -> Result<PromptBundle> {
    if bundle.mode != mode {
        return Err(GenError::ModeMismatch { bundle: bundle.mode, requested: mode });
    }
    let t = &bundle.template;
    let prefix = t.prefix();
    let mut memory = Vec::new();
    let rendered = match mode {
        ContextMode::NoContext => prefix.clone(),
        ContextMode::LibrariesOnly => {
            let mut s = String::new();
            for h in &bundle.library_headers {
                s.push_str(h);
                s.push('\n');
            }
            s.push_str(INSTRUCTION);
            s.push('\n');
            s
        }
        ContextMode::FullContext => {
            if !bundle.library_headers.is_empty() {
                memory.push(Exchange::new(Role::System, format!("Libraries:\n{}", bundle.library_headers.join("\n"))));
            }
            if !bundle.class_and_global_decls.is_empty() {
                memory.push(Exchange::new(Role::System, format!("Declarations:\n{}", bundle.class_and_global_decls)));
            }
            let mut s = String::from(INSTRUCTION);
            s.push_str("\n\n");
            s.push_str(&bundle.code_under_test);
            if !bundle.code_under_test.ends_with('\n') {
                s.push('\n');
            }
            s.push('\n');
            s.push_str(&prefix);
            s
        }
    };
    Ok(PromptBundle {
        id: prompt_id(&t.id, mode),
        mode,
        rendered_prompt: rendered,
        memory,
        template_ref: t.id.clone(),
        template_prefix: prefix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub template_id: String,
    pub mode: ContextMode,
    pub index: usize,
    pub raw_text: String,
    pub prompt_ref: String,
    pub sampling: SamplingConfig,
    pub provider_id: String,
    pub truncated: bool,
    #[serde(default)]
    pub continuation_rounds: u32,
}

impl Candidate {
    pub fn is_empty_completion(&self) -> bool {
        self.raw_text.trim().is_empty()
    }
}

pub fn candidate_id(template_id: &str, mode: ContextMode, temperature: f64, index: usize) -> String {
    format!("{template_id}.{mode}.{}.{index}", temperature_dir(temperature))
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(250) }
    }
}

impl RetryPolicy {
    pub fn immediate() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::ZERO }
    }
}

/// Caps provider requests across a whole run.
#[derive(Debug, Default)]
pub struct Budget {
    limit: Option<usize>,
    used: AtomicUsize,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn requests(limit: usize) -> Self {
        Budget { limit: Some(limit), used: AtomicUsize::new(0) }
    }

    fn take(&self) -> Result<()> {
        let prev = self.used.fetch_add(1, Ordering::SeqCst);
        match self.limit {
            Some(l) if prev >= l => Err(GenError::BudgetExceeded),
            _ => Ok(()),
        }
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst)
    }
}

pub struct Generator<'p> {
    pub provider: &'p dyn Provider,
    pub retry: RetryPolicy,
    pub budget: Budget,
    /// Temperature for continuation and feedback turns; the sweep only
    /// applies to fresh samples.
    pub agent_temperature: f64,
}

impl<'p> Generator<'p> {
    pub fn new(provider: &'p dyn Provider) -> Self {
        Generator { provider, retry: RetryPolicy::default(), budget: Budget::unlimited(), agent_temperature: 0.0 }
    }

    fn request(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>> {
        let mut last = None;
        for attempt in 0..self.retry.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
            }
            self.budget.take()?;
            match self.provider.complete(req) {
                Ok(v) if v.len() == req.n => return Ok(v),
                Ok(v) => last = Some(ProviderError::Rejected(format!("expected {} completions, got {}", req.n, v.len()))),
                Err(e) => {
                    log::debug!("provider attempt {} failed: {e}", attempt + 1);
                    last = Some(e);
                }
            }
        }
        let attempts = self.retry.max_attempts.max(1);
        Err(match last {
            Some(ProviderError::Timeout(message)) => GenError::ProviderTimeout { attempts, message },
            Some(ProviderError::Rejected(message)) => GenError::ProviderRejected { attempts, message },
            None => GenError::ProviderRejected { attempts, message: "no attempt made".into() },
        })
    }

    pub fn sample(&self, prompt: &PromptBundle, cfg: &SamplingConfig) -> Result<Vec<Candidate>> {
        cfg.validate()?;
        if !self.provider.supports(cfg.strategy) {
            return Err(GenError::UnsupportedStrategy { provider: self.provider.id().into(), strategy: cfg.strategy });
        }
        let req = CompletionRequest {
            key: RequestKey {
                template_id: prompt.template_ref.clone(),
                mode: prompt.mode,
                temperature: cfg.temperature,
                first_index: 0,
                kind: RequestKind::Sample,
            },
            prompt: &prompt.rendered_prompt,
            history: &prompt.memory,
            temperature: cfg.temperature,
            max_tokens: cfg.token_limit,
            n: cfg.num_candidates,
            strategy: cfg.strategy,
        };
        let completions = self.request(&req)?;
        Ok(completions
            .into_iter()
            .enumerate()
            .map(|(index, c)| Candidate {
                id: candidate_id(&prompt.template_ref, prompt.mode, cfg.temperature, index),
                template_id: prompt.template_ref.clone(),
                mode: prompt.mode,
                index,
                raw_text: c.text,
                prompt_ref: prompt.id.clone(),
                sampling: cfg.clone(),
                provider_id: self.provider.id().into(),
                truncated: c.stop_reason == StopReason::Length,
                continuation_rounds: 0,
            })
            .collect())
    }

    /// Feeds the truncated tail back as completion context until the provider
    /// stops on its own, for at most two rounds.
    pub fn continue_truncated(&self, prompt: &PromptBundle, candidate: &Candidate) -> Result<Candidate> {
        if !candidate.truncated {
            return Err(GenError::NotTruncated(candidate.id.clone()));
        }
        let mut merged = candidate.clone();
        while merged.continuation_rounds < MAX_CONTINUATIONS {
            let round = merged.continuation_rounds + 1;
            let mut history = prompt.memory.clone();
            history.push(Exchange::new(Role::User, prompt.rendered_prompt.clone()));
            history.push(Exchange::new(Role::Assistant, tail_lines(&merged.raw_text, CONTINUATION_TAIL_LINES)));
            let req = CompletionRequest {
                key: RequestKey {
                    template_id: candidate.template_id.clone(),
                    mode: candidate.mode,
                    temperature: candidate.sampling.temperature,
                    first_index: candidate.index,
                    kind: RequestKind::Continue(round),
                },
                prompt: CONTINUE_INSTRUCTION,
                history: &history,
                temperature: self.agent_temperature,
                max_tokens: candidate.sampling.token_limit,
                n: 1,
                strategy: Strategy::Random,
            };
            let c = self.request(&req)?.remove(0);
            merged.raw_text.push_str(&c.text);
            merged.continuation_rounds = round;
            merged.truncated = c.stop_reason == StopReason::Length;
            if !merged.truncated {
                return Ok(merged);
            }
        }
        Err(GenError::StillTruncated(Box::new(merged)))
    }

    /// One full-context regeneration with the failing candidate and its
    /// compiler diagnostics in memory.
    pub fn regenerate_with_feedback(&self, full_prompt: &PromptBundle, failing: &Candidate, diagnostics: &str) -> Result<Candidate> {
        let mut history = full_prompt.memory.clone();
        history.push(Exchange::new(Role::User, full_prompt.rendered_prompt.clone()));
        history.push(Exchange::new(Role::Assistant, failing.raw_text.clone()));
        let feedback = format!("{FEEDBACK_INSTRUCTION}\n{}", diagnostics.trim_end());
        let req = CompletionRequest {
            key: RequestKey {
                template_id: failing.template_id.clone(),
                mode: full_prompt.mode,
                temperature: failing.sampling.temperature,
                first_index: failing.index,
                kind: RequestKind::Feedback,
            },
            prompt: &feedback,
            history: &history,
            temperature: self.agent_temperature,
            max_tokens: failing.sampling.token_limit,
            n: 1,
            strategy: Strategy::Random,
        };
        let c = self.request(&req)?.remove(0);
        Ok(Candidate {
            id: format!("{}.feedback", failing.id),
            template_id: failing.template_id.clone(),
            mode: full_prompt.mode,
            index: failing.index,
            raw_text: c.text,
            prompt_ref: full_prompt.id.clone(),
            sampling: failing.sampling.clone(),
            provider_id: self.provider.id().into(),
            truncated: c.stop_reason == StopReason::Length,
            continuation_rounds: 0,
        })
    }
}

fn tail_lines(s: &str, n: usize) -> String {
    let lines: Vec<&str> = s.lines().collect();
    let mut out = lines[lines.len().saturating_sub(n)..].join("\n");
    if s.ends_with('\n') {
        out.push('\n');
    }
    out
}

/// Production lines that show up in a prompt without being part of the
/// template file itself.
pub fn leaked_lines(prompt: &str, production_sources: &[String], template_source: &str) -> Vec<String> {
    let allowed: HashSet<&str> = template_source.lines().map(str::trim).collect();
    let prompt_lines: HashSet<&str> = prompt.lines().map(str::trim).collect();
    let mut out = BTreeSet::new();
    for src in production_sources {
        for line in src.lines().map(str::trim) {
            if !is_significant(line) || allowed.contains(line) {
                continue;
            }
            if prompt_lines.contains(line) {
                out.insert(line.to_string());
            }
        }
    }
    out.into_iter().collect()
}

fn is_significant(line: &str) -> bool {
    // directives such as `#pragma omp ...` are code too
    if let Some(d) = line.strip_prefix('#') {
        return d.split_whitespace().count() >= 2;
    }
    let toks = cxx::code_tokens(line);
    toks.iter().any(|t| t.kind == cxx::TokenKind::Ident) && toks.len() >= 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub template_id: String,
    pub mode: ContextMode,
    pub temperature: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum GenEntry {
    Prompt(PromptBundle),
    Candidate(Candidate),
    CellFailed(CellFailure),
}

#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub modes: Vec<ContextMode>,
    pub temperatures: Vec<f64>,
    pub cfg: SamplingConfig,
    pub jobs: usize,
    pub continue_truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct CellKey<'a> {
    template: &'a str,
    mode: ContextMode,
    temperature: f64,
}

/// Everything generated so far, deduplicated by id (later records win).
#[derive(Debug, Clone, Default)]
pub struct GenerationLedger {
    pub prompts: BTreeMap<String, PromptBundle>,
    pub candidates: BTreeMap<String, Candidate>,
    pub failed: Vec<CellFailure>,
}

impl GenerationLedger {
    pub fn load(path: &Path) -> Result<Self> {
        let mut out = GenerationLedger::default();
        for e in ledger::read::<GenEntry>(path)? {
            out.insert(e);
        }
        Ok(out)
    }

    fn insert(&mut self, e: GenEntry) {
        match e {
            GenEntry::Prompt(p) => {
                self.prompts.insert(p.id.clone(), p);
            }
            GenEntry::Candidate(c) => {
                self.candidates.insert(c.id.clone(), c);
            }
            GenEntry::CellFailed(f) => {
                if !self.failed.contains(&f) {
                    self.failed.push(f);
                }
            }
        }
    }

    fn cell_done(&self, cell: &CellKey<'_>, n: usize) -> bool {
        self.failed.iter().any(|f| f.template_id == cell.template && f.mode == cell.mode && f.temperature == cell.temperature)
            || (0..n).all(|i| self.candidates.contains_key(&candidate_id(cell.template, cell.mode, cell.temperature, i)))
    }

    /// Candidates in id order.
    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.values()
    }
}

/// Samples every (template, mode, temperature) cell, appending each finished
/// cell to the ledger at `path`. Cells already complete in the ledger are
/// skipped. A failing cell is recorded and does not stop the others.
pub fn run_matrix(
    manifest: &ProjectManifest,
    templates: &[TestTemplate],
    gen: &Generator<'_>,
    spec: &MatrixSpec,
    path: &Path,
) -> Result<GenerationLedger> {
    if spec.modes.is_empty() || spec.temperatures.is_empty() || templates.is_empty() {
        return Err(GenError::InvalidConfig("empty template, mode or temperature set".into()));
    }
    for &t in &spec.temperatures {
        spec.cfg.at_temperature(t).validate()?;
    }
    let mut state = GenerationLedger::load(path)?;
    let mut cells = Vec::new();
    for t in templates {
        for &mode in &spec.modes {
            for &temperature in &spec.temperatures {
                let cell = CellKey { template: &t.id, mode, temperature };
                if !state.cell_done(&cell, spec.cfg.num_candidates) {
                    cells.push((t, cell));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.jobs.max(1)).build().map_err(|e| GenError::InvalidConfig(e.to_string()))?;
    for chunk in cells.chunks(spec.jobs.max(1)) {
        let results: Vec<Vec<GenEntry>> =
            pool.install(|| chunk.par_iter().map(|(t, cell)| run_cell(manifest, t, cell, gen, spec)).collect());
        for entries in results {
            ledger::append(path, &entries)?;
            for e in entries {
                state.insert(e);
            }
        }
    }
    Ok(state)
}

fn run_cell(manifest: &ProjectManifest, t: &TestTemplate, cell: &CellKey<'_>, gen: &Generator<'_>, spec: &MatrixSpec) -> Vec<GenEntry> {
    let fail = |e: GenError| {
        log::warn!("cell {}/{}/{} failed: {e}", cell.template, cell.mode, cell.temperature);
        vec![GenEntry::CellFailed(CellFailure {
            template_id: cell.template.into(),
            mode: cell.mode,
            temperature: cell.temperature,
            error: e.to_string(),
        })]
    };
    let prompt = match corpus::build_context(manifest, t, cell.mode).map_err(GenError::from).and_then(|b| render_prompt(&b, cell.mode)) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let cfg = spec.cfg.at_temperature(cell.temperature);
    let candidates = match gen.sample(&prompt, &cfg) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let mut out = vec![GenEntry::Prompt(prompt.clone())];
    for c in candidates {
        let c = if spec.continue_truncated && c.truncated {
            match gen.continue_truncated(&prompt, &c) {
                Ok(m) => m,
                Err(GenError::StillTruncated(m)) => *m,
                Err(e) => {
                    log::warn!("continuation of {} failed: {e}", c.id);
                    c
                }
            }
        } else {
            c
        };
        out.push(GenEntry::Candidate(c));
    }
    out
}
