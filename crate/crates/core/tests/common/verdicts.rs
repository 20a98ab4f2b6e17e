use super::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;
use testgen_core::corpus::{load_manifest, load_templates, AssertionStyle};
use testgen_core::harness::{compile, determinism_gate, evaluate_batch, rates, run, CompileStatus, HarnessConfig, Job, Verdict};

#[derive(Debug, Deserialize)]
pub struct Label {
    pub style: AssertionStyle,
    pub methods_total: usize,
    pub methods_passed: usize,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub timed_out: bool,
}

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/verdicts")
}

pub fn cfg() -> HarnessConfig {
    HarnessConfig { run_timeout: Duration::from_secs(3), jobs: Some(4), oversubscribe: true, ..Default::default() }
}
