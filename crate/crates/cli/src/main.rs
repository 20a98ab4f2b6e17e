use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use testgen_core::corpus;
use testgen_core::coverage;
use testgen_core::diagnostics::{self, DistanceMode};
use testgen_core::fixer::{self, FixReport};
use testgen_core::fixtures::{self, FixtureStatus, ValidateOptions};
use testgen_core::generator::{self, GenerationLedger, Generator};
use testgen_core::harness::{self, BatchEntry, Job};
use testgen_core::ledger;
use testgen_core::parallelism;
use testgen_core::pipeline::{self, ConfigError, Overrides, PipelineConfig, PipelineError, ProjectContext, EXIT_CONFIG};
use testgen_core::report;
use testgen_core::smells::{self, SmellConfig};

#[derive(Parser)]
#[command(name = "testgen", version, about = "Generate and evaluate unit tests for OpenMP/MPI C++ projects")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Pipeline config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Project manifest.
    #[arg(long)]
    project: Option<PathBuf>,
    /// `mock:<dir>`, `http:<url>`, `http` (URL from the environment) or `echo`.
    #[arg(long)]
    provider: Option<String>,
    /// Context modes, comma separated.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<String>,
    /// Sampling temperatures, comma separated.
    #[arg(long, value_delimiter = ',')]
    temperature: Vec<f64>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    token_limit: Option<u32>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a project and list its test templates.
    Ingest(Common),
    /// Sample candidates for every template, mode and temperature.
    Generate(Common),
    /// Apply the fixers to generated candidates.
    Fix(Common),
    /// Build and run fixed candidates.
    Evaluate(Common),
    /// Coverage of one test, or parse existing gcov files.
    Coverage {
        #[command(flatten)]
        common: Common,
        /// Test file to build instrumented in place of its template.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Annotated gcov files to parse instead of building.
        #[arg(long, num_args = 1..)]
        gcov: Vec<PathBuf>,
    },
    /// Detect test smells in test files.
    Smells {
        #[command(flatten)]
        common: Common,
        files: Vec<PathBuf>,
    },
    /// Parallelism report for test files.
    Parallelism {
        #[command(flatten)]
        common: Common,
        /// Human-written test to compare against.
        #[arg(long)]
        gold: Option<PathBuf>,
        files: Vec<PathBuf>,
    },
    /// Cluster compiler error messages.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// One message per line; otherwise the errors in <out>/ledger.jsonl.
        #[arg(long)]
        messages: Option<PathBuf>,
        /// Fixed k instead of the elbow search.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Edit-distance similarity of a generated test to a human one.
    Similarity {
        generated: PathBuf,
        gold: PathBuf,
        /// Characters instead of lexical tokens.
        #[arg(long)]
        chars: bool,
        #[arg(long, default_value_t = diagnostics::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Rebuild report.json and report.txt from <out>/ledger.jsonl.
    Report(Common),
    /// Run the whole pipeline.
    Run(Common),
    /// Check bundled fixtures against their annotations.
    ValidateFixtures {
        /// Directory holding fixture projects.
        #[arg(long, default_value = "fixtures")]
        root: PathBuf,
        /// Static checks only.
        #[arg(long)]
        no_build: bool,
    },
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        let provider = match &self.provider {
            Some(p) if p.starts_with("mock:") => {
                let dir = std::path::absolute(&p["mock:".len()..])?;
                Some(format!("mock:{}", dir.display()))
            }
            other => other.clone(),
        };
        Ok(Overrides {
            provider,
            modes: (!self.mode.is_empty()).then(|| self.mode.clone()),
            temperatures: (!self.temperature.is_empty()).then(|| self.temperature.clone()),
            candidates: self.candidates,
            token_limit: self.token_limit,
            jobs: self.jobs,
            seed: self.seed,
            out: self.out.clone(),
        })
    }

    /// Config file plus flags, or flags alone.
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match (&self.config, &self.project) {
            (Some(path), _) => PipelineConfig::load(path)?,
            (None, Some(manifest)) => {
                let manifest = std::path::absolute(manifest)?;
                let text = format!("[project]\nmanifest = {:?}\n[provider]\nkind = \"echo\"\n", manifest.display().to_string());
                PipelineConfig::parse(&text, &std::env::current_dir()?)?
            }
            (None, None) => bail!(ConfigError::Invalid("need --config or --project".into())),
        };
        if let (Some(_), Some(manifest)) = (&self.config, &self.project) {
            cfg.project.manifest = std::path::absolute(manifest)?;
        }
        cfg.apply(&self.overrides()?);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

macro_rules! out_raw {
    ($($arg:tt)*) => {
        write!(std::io::stdout().lock(), $($arg)*)?
    };
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn project(cfg: &PipelineConfig) -> Result<ProjectContext> {
    Ok(ProjectContext::load(&cfg.resolve(&cfg.project.manifest))?)
}

fn generation_ledger(out: &Path) -> Result<GenerationLedger> {
    let path = out.join("generation.jsonl");
    if !path.exists() {
        bail!("{} not found; run `testgen generate` first", path.display());
    }
    Ok(GenerationLedger::load(&path)?)
}

fn ingest(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let path = cfg.resolve(&cfg.project.manifest);
    let m = corpus::load_manifest(&path)?;
    let templates = corpus::load_templates(&m)?;
    print_json(&serde_json::json!({
        "name": m.name,
        "framework": m.parallel_framework.to_string(),
        "warnings": m.soft_criteria_warnings(),
        "templates": corpus::templates_to_json(&templates),
    }))?;
    Ok(0)
}

fn generate(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let provider = cfg.provider()?;
    let mut gen = Generator::new(provider.as_ref());
    gen.agent_temperature = cfg.generation.agent_temperature;
    let jobs = cfg.harness().effective_jobs(&p.manifest);
    let templates: Vec<_> = p.templates.values().cloned().collect();
    let out = cfg.out_dir();
    let state = generator::run_matrix(&p.manifest, &templates, &gen, &cfg.matrix_spec(cfg.modes()?, jobs), &out.join("generation.jsonl"))?;
    out!(
        "{} prompts, {} candidates, {} failed cells -> {}",
        state.prompts.len(),
        state.candidates.len(),
        state.failed.len(),
        out.display()
    );
    for f in &state.failed {
        eprintln!("failed: {} {} t{}: {}", f.template_id, f.mode, f.temperature, f.error);
    }
    Ok(if state.failed.is_empty() { 0 } else { pipeline::EXIT_PARTIAL })
}

fn fix(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let out = cfg.out_dir();
    let state = generation_ledger(&out)?;
    let mut reports = Vec::new();
    let mut rules: BTreeMap<String, usize> = BTreeMap::new();
    for cand in state.candidates() {
        let Some(t) = p.templates.get(&cand.template_id) else { continue };
        let ctx = fixer::FixContext {
            prompt: state.prompts.get(&cand.prompt_ref),
            production: &p.production,
            known_headers: Some(&p.known_headers),
            ..Default::default()
        };
        let (fixed, r) = fixer::fix(cand, t, &ctx);
        ledger::write_atomic(&out.join("artifacts").join(&cand.id).join("fixed.cpp"), fixed.as_bytes())?;
        for rule in &r.applied_rules {
            *rules.entry(rule.clone()).or_default() += 1;
        }
        reports.push(r);
    }
    ledger::write_atomic(&out.join("fix.jsonl"), &jsonl(&reports)?)?;
    let unfixable = reports.iter().filter(|r| r.unfixable).count();
    let unchanged = reports.iter().filter(|r| r.unchanged).count();
    out!("{} candidates, {unchanged} unchanged, {unfixable} unfixable", reports.len());
    for (rule, n) in rules {
        out!("  {rule}: {n}");
    }
    Ok(0)
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for i in items {
        serde_json::to_writer(&mut buf, i)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

fn evaluate(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let out = cfg.out_dir();
    let reports: Vec<FixReport> = ledger::read(&out.join("fix.jsonl")).context("run `testgen fix` first")?;
    let state = generation_ledger(&out)?;
    let jobs: Vec<Job<'_>> = reports
        .iter()
        .filter_map(|r| {
            let cand = state.candidates.get(&r.candidate_ref)?;
            let t = p.templates.get(&cand.template_id)?;
            Some(Job { candidate_ref: r.candidate_ref.clone(), fixed: r.after.clone(), template: t })
        })
        .collect();
    let entries: Vec<BatchEntry> = harness::evaluate_batch(&p.manifest, &jobs, &cfg.harness());
    ledger::write_atomic(&out.join("evaluate.jsonl"), &jsonl(&entries)?)?;
    print_json(&harness::rates(entries.iter().map(|e| (&e.compile, &e.verdict))))?;
    Ok(if entries.iter().any(|e| e.error.is_some()) { pipeline::EXIT_PARTIAL } else { 0 })
}

fn coverage_cmd(c: &Common, test: Option<&Path>, gcov: &[PathBuf]) -> Result<i32> {
    if !gcov.is_empty() {
        let files: Vec<(String, String)> =
            gcov.iter().map(|f| Ok((f.display().to_string(), fs::read_to_string(f)?))).collect::<Result<_>>()?;
        print_json(&coverage::parse_annotated("gcov", &files)?)?;
        return Ok(0);
    }
    let Some(test) = test else { bail!("need --test or --gcov") };
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let text = fs::read_to_string(test)?;
    let stem = corpus::test_id(test);
    let t = p.templates.get(&stem).with_context(|| format!("no template `{stem}` in the project"))?;
    print_json(&coverage::instrumented_build_and_run(&p.manifest, &stem, &text, t, &cfg.harness())?)?;
    Ok(0)
}

fn smells_cmd(c: &Common, files: &[PathBuf]) -> Result<i32> {
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let mut all = Vec::new();
    for f in files {
        let src = fs::read_to_string(f)?;
        let found = smells::detect(f, &src, &p.symbols, &SmellConfig::default())?;
        for s in &found {
            out!("{}:{}: {} {}", s.file.display(), s.line, s.kind.code(), s.evidence);
        }
        all.push(found);
    }
    print_json(&smells::distribution(all.iter().map(Vec::as_slice)))?;
    Ok(0)
}

fn parallelism_cmd(c: &Common, gold: Option<&Path>, files: &[PathBuf]) -> Result<i32> {
    let cfg = c.config()?;
    let p = project(&cfg)?;
    let gold = match gold {
        Some(g) => Some(parallelism::analyze_test_parallelism(g, &fs::read_to_string(g)?, &p.profile)?),
        None => None,
    };
    for f in files {
        let r = parallelism::analyze_test_parallelism(f, &fs::read_to_string(f)?, &p.profile)?;
        let mut v = serde_json::json!({ "file": f.display().to_string(), "report": r });
        if let Some(g) = &gold {
            v["gold_comparison"] = serde_json::to_value(parallelism::gold_comparison(&r, g))?;
        }
        print_json(&v)?;
    }
    Ok(0)
}

fn cluster_cmd(c: &Common, messages: Option<&Path>, k: Option<usize>, k_max: usize) -> Result<i32> {
    let seed = c.seed.unwrap_or(0);
    let msgs: BTreeMap<String, String> = match messages {
        Some(path) => fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| (format!("m{i:05}"), harness::normalize_message(l)))
            .collect(),
        None => {
            let out = c.out.clone().or_else(|| c.config().ok().map(|cfg| cfg.out_dir())).context("need --messages or --out")?;
            let records: Vec<_> = pipeline::load_records(&out.join("ledger.jsonl"))?.into_values().collect();
            report::error_messages(&records)
        }
    };
    let vectors = diagnostics::vectorize(msgs.iter().map(|(r, m)| (r.clone(), m.as_str())))?;
    let k = match k {
        Some(k) => k,
        None => {
            let ks: Vec<usize> = (1..=k_max.min(vectors.len())).collect();
            diagnostics::select_k(&vectors, &ks, seed)?.k
        }
    };
    let model = diagnostics::kmeans(&vectors, k, seed)?;
    print_json(&diagnostics::cluster_report(&model, &vectors, &msgs, 5))?;
    Ok(0)
}

fn similarity_cmd(generated: &Path, gold: &Path, chars: bool, threshold: f64) -> Result<i32> {
    let mode = if chars { DistanceMode::Chars } else { DistanceMode::Tokens };
    let s = diagnostics::score(
        &generated.display().to_string(),
        &fs::read_to_string(generated)?,
        &gold.display().to_string(),
        &fs::read_to_string(gold)?,
        mode,
        threshold,
    );
    out!("{}", serde_json::to_string(&s)?);
    Ok(0)
}

fn report_cmd(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let out = cfg.out_dir();
    let records = pipeline::load_records(&out.join("ledger.jsonl"))?;
    if records.is_empty() {
        bail!("no records in {}", out.join("ledger.jsonl").display());
    }
    let failures = GenerationLedger::load(&out.join("generation.jsonl")).map(|g| g.failed.len()).unwrap_or(0);
    let all: Vec<_> = records.values().cloned().collect();
    let rep = report::aggregate(&all, &pipeline::aggregate_settings(&cfg, &cfg.provider.kind, failures));
    pipeline::write_report(&out, &rep, &records)?;
    out_raw!("{}", report::render_tables(&rep));
    Ok(0)
}

fn run_cmd(c: &Common) -> Result<i32> {
    let cfg = c.config()?;
    let outcome = pipeline::run_pipeline(&cfg)?;
    out_raw!("{}", report::render_tables(&outcome.report));
    eprintln!("report written to {}", outcome.out_dir.display());
    Ok(outcome.exit_code)
}

fn validate_cmd(root: &Path, no_build: bool) -> Result<i32> {
    let opts = ValidateOptions { build_and_run: !no_build, ..ValidateOptions::default() };
    let results = fixtures::validate_fixtures(root, &opts);
    if results.is_empty() {
        bail!("no fixtures with annotations under {}", root.display());
    }
    let mut failed = false;
    for r in &results {
        match &r.status {
            FixtureStatus::Pass => out!("{}: pass", r.name),
            FixtureStatus::Skipped { reason } => out!("{}: skipped ({reason})", r.name),
            FixtureStatus::Fail { drift } => {
                failed = true;
                out!("{}: FAIL", r.name);
                for d in drift {
                    out!("  {d}");
                }
            }
        }
    }
    Ok(if failed { 1 } else { 0 })
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    if let Some(p) = e.downcast_ref::<PipelineError>() {
        return p.exit_code();
    }
    if e.downcast_ref::<corpus::CorpusError>().is_some() {
        return EXIT_CONFIG;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let res = match &cli.cmd {
        Cmd::Ingest(c) => ingest(c),
        Cmd::Generate(c) => generate(c),
        Cmd::Fix(c) => fix(c),
        Cmd::Evaluate(c) => evaluate(c),
        Cmd::Coverage { common, test, gcov } => coverage_cmd(common, test.as_deref(), gcov),
        Cmd::Smells { common, files } => smells_cmd(common, files),
        Cmd::Parallelism { common, gold, files } => parallelism_cmd(common, gold.as_deref(), files),
        Cmd::Cluster { common, messages, k, k_max } => cluster_cmd(common, messages.as_deref(), *k, *k_max),
        Cmd::Similarity { generated, gold, chars, threshold } => similarity_cmd(generated, gold, *chars, *threshold),
        Cmd::Report(c) => report_cmd(c),
        Cmd::Run(c) => run_cmd(c),
        Cmd::ValidateFixtures { root, no_build } => validate_cmd(root, *no_build),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        // output piped into something that stopped reading
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
