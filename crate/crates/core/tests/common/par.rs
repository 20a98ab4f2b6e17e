use super::*;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use testgen_core::parallelism::{
    analyze_source_parallelism, analyze_test_parallelism, gold_comparison, parallel_depths, DataType, ParallelismReport, Relation,
    SourceProfile,
};

pub fn cpp_files(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .map(|e| e.into_path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("cpp" | "hpp")))
        .collect();
    out.sort();
    out
}

/// Walks characters keeping a stack of open braces, each tagged with
/// whether a parallel pragma opened it. A parallel pragma's depth is one
/// more than the number of tagged braces open at that point.
pub fn oracle_depths(src: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut stack: Vec<bool> = Vec::new();
    let mut pending = false;
    let mut in_block = false;
    for (n, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        if !in_block && trimmed.starts_with('#') {
            let words: Vec<&str> = trimmed.trim_start_matches('#').split_whitespace().collect();
            if words.len() >= 2 && words[0] == "pragma" && words[1] == "omp" && words.contains(&"parallel") {
                out.push((n + 1, 1 + stack.iter().filter(|t| **t).count()));
                pending = true;
            }
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let mut quote: Option<char> = None;
        while i < chars.len() {
            let c = chars[i];
            if in_block {
                if c == '*' && chars.get(i + 1) == Some(&'/') {
                    in_block = false;
                    i += 1;
                }
            } else if let Some(q) = quote {
                if c == '\\' {
                    i += 1;
                } else if c == q {
                    quote = None;
                }
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            } else if c == '/' && chars.get(i + 1) == Some(&'*') {
                in_block = true;
                i += 1;
            } else if c == '"' || c == '\'' {
                quote = Some(c);
            } else if c == '{' {
                stack.push(pending);
                pending = false;
            } else if c == '}' {
                stack.pop();
            }
            i += 1;
        }
    }
    out
}

pub fn profile_of(dir: &Path) -> SourceProfile {
    let files: Vec<(PathBuf, String)> = cpp_files(dir).into_iter().map(|p| (p.clone(), fs::read_to_string(&p).unwrap())).collect();
    analyze_source_parallelism(files.iter().map(|(p, s)| (p.as_path(), s.as_str()))).unwrap()
}

pub fn labels() -> BTreeMap<String, ParallelismReport> {
    serde_json::from_str(&fs::read_to_string(fixtures().join("parallelism/labels.json")).unwrap()).unwrap()
}
