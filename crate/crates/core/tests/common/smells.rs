use super::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use testgen_core::smells::{detect, distribution, SmellConfig, SmellFinding, SmellKind, SymbolIndex};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/smells")
}

pub fn index() -> SymbolIndex {
    let srcs: Vec<(PathBuf, String)> =
        ["src/stats.hpp", "src/stats.cpp"].iter().map(|p| (PathBuf::from(p), fs::read_to_string(root().join(p)).unwrap())).collect();
    SymbolIndex::build(srcs.iter().map(|(p, s)| (p.as_path(), s.as_str())))
}

pub fn labels() -> BTreeMap<String, BTreeSet<(SmellKind, usize)>> {
    let raw: BTreeMap<String, Vec<(String, usize)>> =
        serde_json::from_str(&fs::read_to_string(root().join("labels.json")).unwrap()).unwrap();
    raw.into_iter().map(|(f, v)| (f, v.into_iter().map(|(k, l)| (k.parse().unwrap(), l)).collect())).collect()
}

pub fn run_all(idx: &SymbolIndex) -> BTreeMap<String, Vec<SmellFinding>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(root().join("tests")).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let src = fs::read_to_string(&p).unwrap();
        out.insert(name.clone(), detect(Path::new(&name), &src, idx, &SmellConfig::default()).unwrap());
    }
    out
}
