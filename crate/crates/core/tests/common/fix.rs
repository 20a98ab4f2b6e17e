use super::*;
use serde::Deserialize;
use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use testgen_core::corpus::{extract_template_from, ContextMode, TestTemplate};
use testgen_core::cxx;
use testgen_core::fixer::{fix_idempotence_check, fix_text, FixContext};
use testgen_core::generator::PromptBundle;

#[derive(Deserialize)]
pub struct Case {
    pub template: String,
    #[serde(default)]
    pub production: Vec<String>,
    #[serde(default)]
    pub known_headers: Option<BTreeSet<String>>,
    #[serde(default)]
    pub prompt: Option<String>,
    #[serde(default)]
    pub unfixable: bool,
}

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fixer")
}

pub struct Loaded {
    pub name: String,
    pub dir: PathBuf,
    pub case: Case,
    pub template: TestTemplate,
    pub raw: String,
    pub production: Vec<String>,
    pub prompt: Option<PromptBundle>,
}

pub fn cases() -> Vec<Loaded> {
    let mut out = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root().join("cases")).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    for dir in dirs {
        let case: Case = toml::from_str(&fs::read_to_string(dir.join("case.toml")).unwrap()).unwrap();
        let tpl_path = root().join("templates").join(format!("{}.cpp", case.template));
        let template = extract_template_from(Path::new("tests/t.cpp"), &fs::read_to_string(tpl_path).unwrap()).unwrap();
        let production = case.production.iter().map(|p| fs::read_to_string(root().join(p)).unwrap()).collect();
        let prompt = case.prompt.as_ref().map(|p| PromptBundle {
            id: "p".into(),
            mode: ContextMode::FullContext,
            rendered_prompt: fs::read_to_string(dir.join(p)).unwrap(),
            memory: vec![],
            template_ref: template.id.clone(),
            template_prefix: template.prefix(),
        });
        out.push(Loaded {
            name: dir.file_name().unwrap().to_string_lossy().into_owned(),
            raw: fs::read_to_string(dir.join("raw.txt")).unwrap(),
            dir,
            case,
            template,
            production,
            prompt,
        });
    }
    out
}

pub fn ctx(c: &Loaded) -> FixContext<'_> {
    FixContext { prompt: c.prompt.as_ref(), production: &c.production, known_headers: c.case.known_headers.as_ref(), ..Default::default() }
}

/// Word-level tokens: identifiers, numbers and punctuation runs.
pub fn words(s: &str) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut cur = String::new();
    let mut kind = 0;
    for ch in s.chars() {
        let k = if ch.is_alphanumeric() || ch == '_' {
            1
        } else if ch.is_whitespace() {
            0
        } else {
            2
        };
        if k != kind || k == 2 {
            if !cur.is_empty() {
                out.insert(std::mem::take(&mut cur));
            }
        }
        if k != 0 {
            cur.push(ch);
        }
        kind = k;
    }
    if !cur.is_empty() {
        out.insert(cur);
    }
    out
}
