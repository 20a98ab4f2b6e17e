#![allow(dead_code, unused_imports)]

pub mod cov;
pub mod diag;
pub mod fix;
pub mod gen;
pub mod par;
pub mod smells;
pub mod verdicts;

use std::fs;
use std::path::{Path, PathBuf};

use testgen_core::corpus::{self, ProjectManifest, TestTemplate};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn project(name: &str) -> (ProjectManifest, Vec<TestTemplate>) {
    let m = corpus::load_manifest(&fixtures().join(name).join("manifest.toml")).unwrap();
    let ts = corpus::load_templates(&m).unwrap();
    (m, ts)
}
