use super::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;
use testgen_core::corpus::{load_manifest, load_templates, TestTemplate};
use testgen_core::diagnostics::*;

/// Full (n+1)x(m+1) table, no row reuse.
pub fn dp_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        t[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            t[i][j] = (t[i - 1][j - 1] + c).min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

// Each family: a fixed core phrase and a slot filled from a few variants,
// like normalized compiler messages.
// Each family: a fixed core phrase, an optional slot from a few variants
// and occasional noise, like normalized compiler messages.
pub const FAMILIES: [(&[&str], &[&str]); 3] = [
    (&["expected", "unqualified-id", "before", "<tok>", "token", "at", "global", "scope"], &["')'", "';'", "'}'", "numeric"]),
    (&["<id>", "was", "not", "declared", "in", "this", "scope"], &["did", "you", "mean", "<id>"]),
    (
        &["undefined", "reference", "to", "<id>", "ld", "returned", "exit", "status"],
        &["omp_get_thread_num", "MPI_Init", "vtable", "collect2"],
    ),
];
pub const NOISE: &[&str] = &["error", "note", "<path>", "<num>", "in", "function"];

pub fn planted_corpus(rng: &mut ChaCha8Rng, per_family: usize) -> (Vec<(String, String)>, Vec<usize>) {
    let mut docs = Vec::new();
    let mut truth = Vec::new();
    for (f, (core, slot)) in FAMILIES.iter().enumerate() {
        for i in 0..per_family {
            let mut words: Vec<&str> = core.to_vec();
            if rng.gen_bool(0.5) {
                words.push(slot.choose(rng).unwrap());
            }
            if rng.gen_bool(0.3) {
                words.push(NOISE.choose(rng).unwrap());
            }
            docs.push((format!("f{f}-{i}"), words.join(" ")));
            truth.push(f);
        }
    }
    (docs, truth)
}

pub fn vectors(docs: &[(String, String)]) -> Vec<DiagnosticVector> {
    vectorize(docs.iter().map(|(r, m)| (r.clone(), m.as_str()))).unwrap()
}

pub fn token_seq(max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(prop::sample::select(vec!["x", "y", "(", ")", ";", "=", "42", "assert", "sum", "+"]), 0..=max)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}
