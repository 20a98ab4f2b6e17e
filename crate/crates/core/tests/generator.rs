use std::fs;

use testgen_core::corpus::{self, ContextMode};
use testgen_core::generator::{self, GenerationLedger, Generator, MatrixSpec, MockProvider, RequestKind, SamplingConfig};

mod common;
use common::gen::*;
use common::{fixtures, project};

#[test]
fn no_context_prompts_never_leak_production_code() {
    let provider = Recording::new(Fixed);
    let generator = Generator::new(&provider);
    let tmp = tempfile::tempdir().unwrap();
    let temperatures = vec![0.0, 0.2, 0.4, 0.6, 0.8];
    let mut generated = 0;
    let mut checked_requests = 0;
    for name in ["mini-omp", "mini-mpi"] {
        let (m, ts) = project(name);
        let prod = production(&m);
        let spec = MatrixSpec {
            modes: vec![ContextMode::NoContext],
            temperatures: temperatures.clone(),
            cfg: SamplingConfig { num_candidates: 8, ..SamplingConfig::default() },
            jobs: 1,
            continue_truncated: true,
        };
        let before = provider.requests().len();
        let state = generator::run_matrix(&m, &ts, &generator, &spec, &tmp.path().join(format!("{name}.jsonl"))).unwrap();
        assert!(state.failed.is_empty());
        generated += state.candidates.len();
        for (text, mode, _, _) in &provider.requests()[before..] {
            assert_eq!(*mode, ContextMode::NoContext);
            let t = ts.iter().find(|t| text.starts_with(&t.prefix())).expect("prompt is a template prefix");
            let own = fs::read_to_string(m.root.join(&t.source_path)).unwrap();
            let found = leaks(text, &prod, &own);
            assert!(found.is_empty(), "{}: {found:?}", t.id);
            checked_requests += 1;
        }
        for p in state.prompts.values() {
            let t = ts.iter().find(|t| t.id == p.template_ref).unwrap();
            let own = fs::read_to_string(m.root.join(&t.source_path)).unwrap();
            assert!(leaks(&p.rendered_prompt, &prod, &own).is_empty());
            assert!(generator::leaked_lines(&p.rendered_prompt, &prod, &own).is_empty());
            assert!(p.memory.is_empty());
        }
    }
    assert_eq!(generated, 200);
    assert_eq!(checked_requests, 5 * temperatures.len());
    println!("no-context generations: {generated}, leaks: 0");
}

#[test]
fn full_context_prompts_do_carry_production_code() {
    // the oracle is not vacuous: the full-context prompt for the same
    // templates contains production lines absent from the test file
    let (m, ts) = project("mini-omp");
    let prod = production(&m);
    for t in &ts {
        let b = corpus::build_context(&m, t, ContextMode::FullContext).unwrap();
        let p = generator::render_prompt(&b, ContextMode::FullContext).unwrap();
        let own = fs::read_to_string(m.root.join(&t.source_path)).unwrap();
        let found = leaks(&p.rendered_prompt, &prod, &own);
        assert!(!found.is_empty(), "{}", t.id);
        assert_eq!(found.into_iter().collect::<Vec<_>>(), generator::leaked_lines(&p.rendered_prompt, &prod, &own));
    }
}

fn mock_spec(candidates: usize) -> MatrixSpec {
    MatrixSpec {
        modes: ContextMode::ALL.to_vec(),
        temperatures: vec![0.0],
        cfg: SamplingConfig { num_candidates: candidates, ..SamplingConfig::default() },
        jobs: 1,
        continue_truncated: true,
    }
}

#[test]
fn scripted_matrix_and_resume() {
    let (m, ts) = project("mini-omp");
    let provider = Recording::new(MockProvider::new(fixtures().join("mock/mini-omp")));
    let generator = Generator::new(&provider);
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("generation.jsonl");
    let state = generator::run_matrix(&m, &ts, &generator, &mock_spec(4), &path).unwrap();
    assert!(state.failed.is_empty(), "{:?}", state.failed);
    assert_eq!(state.prompts.len(), 9);
    assert_eq!(state.candidates.len(), 36);

    // one scripted token-limit stop, continued once
    let continued: Vec<&str> = state.candidates().filter(|c| c.continuation_rounds > 0).map(|c| c.id.as_str()).collect();
    assert_eq!(continued, ["test_saxpy.full_context.t0.3"]);
    let c = &state.candidates["test_saxpy.full_context.t0.3"];
    assert!(!c.truncated);
    let reqs = provider.requests();
    assert_eq!(reqs.iter().filter(|r| r.2 == RequestKind::Sample).count(), 9);
    assert_eq!(reqs.iter().filter(|r| matches!(r.2, RequestKind::Continue(_))).count(), 1);

    // candidate text equals its script
    let raw = fs::read_to_string(fixtures().join("mock/mini-omp/test_reduce/no_context/t0/2.txt")).unwrap();
    assert_eq!(state.candidates["test_reduce.no_context.t0.2"].raw_text, raw);

    // a second run finds every cell done and sends nothing
    let again = generator::run_matrix(&m, &ts, &generator, &mock_spec(4), &path).unwrap();
    assert_eq!(provider.requests().len(), reqs.len());
    assert_eq!(again.candidates, state.candidates);
    assert_eq!(GenerationLedger::load(&path).unwrap().candidates, state.candidates);
}

#[test]
fn missing_script_fails_only_its_cell() {
    let (m, ts) = project("mini-omp");
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mock");
    // scripts for one template only
    for e in walkdir::WalkDir::new(fixtures().join("mock/mini-omp/test_reduce")) {
        let e = e.unwrap();
        let dst = dir.join("test_reduce").join(e.path().strip_prefix(fixtures().join("mock/mini-omp/test_reduce")).unwrap());
        if e.file_type().is_dir() {
            fs::create_dir_all(&dst).unwrap();
        } else {
            fs::copy(e.path(), &dst).unwrap();
        }
    }
    let provider = MockProvider::new(&dir);
    let mut generator = Generator::new(&provider);
    generator.retry = generator::RetryPolicy::immediate();
    let path = tmp.path().join("g.jsonl");
    let state = generator::run_matrix(&m, &ts, &generator, &mock_spec(2), &path).unwrap();
    assert_eq!(state.failed.len(), 6);
    assert!(state.failed.iter().all(|f| f.template_id != "test_reduce"));
    assert_eq!(state.candidates.len(), 6);
    assert!(state.candidates().all(|c| c.template_id == "test_reduce"));
    assert!(state.failed[0].error.contains("no scripted response"), "{}", state.failed[0].error);
}

#[test]
fn candidate_ids_are_stable() {
    assert_eq!(generator::candidate_id("test_x", ContextMode::LibrariesOnly, 0.4, 7), "test_x.libraries_only.t0.4.7");
    assert_eq!(generator::prompt_id("test_x", ContextMode::NoContext), "test_x.no_context");
}
