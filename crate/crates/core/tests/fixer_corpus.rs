//! Golden (input, expected) pairs for the fixer.

use std::collections::HashSet;
use std::fs;

use testgen_core::cxx;
use testgen_core::fixer::{fix_idempotence_check, fix_text};

mod common;
use common::fix::*;

#[test]
fn corpus_is_big_enough() {
    assert!(cases().len() >= 15);
}

#[test]
fn golden_outputs() {
    let bless = std::env::var_os("FIXER_BLESS").is_some();
    for c in cases() {
        let out = fix_text(&c.raw, &c.template, &ctx(&c));
        let expected_path = c.dir.join("expected.cpp");
        if bless {
            fs::write(&expected_path, &out.text).unwrap();
        }
        let expected = fs::read_to_string(&expected_path).unwrap();
        assert_eq!(out.text, expected, "case {}", c.name);
        assert_eq!(out.unfixable, c.case.unfixable, "case {}", c.name);
    }
}

#[test]
fn idempotent() {
    for c in cases() {
        assert!(fix_idempotence_check(&c.raw, &c.template, &ctx(&c)), "case {}", c.name);
    }
}

#[test]
fn template_includes_present_once() {
    for c in cases().into_iter().filter(|c| !c.case.unfixable) {
        let out = fix_text(&c.raw, &c.template, &ctx(&c));
        let directives: Vec<String> = cxx::include_directives(&out.text);
        for inc in &c.template.includes {
            let n = directives.iter().filter(|d| cxx::include_target(d) == cxx::include_target(inc)).count();
            assert_eq!(n, 1, "case {}: {inc}", c.name);
        }
    }
}

#[test]
fn no_invention() {
    for c in cases() {
        let out = fix_text(&c.raw, &c.template, &ctx(&c));
        let allowed: HashSet<String> = words(&c.raw).union(&words(&c.template.render())).cloned().collect();
        let extra: Vec<String> = words(&out.text).difference(&allowed).cloned().collect();
        assert!(extra.is_empty(), "case {}: invented {extra:?}", c.name);
    }
}

#[test]
fn balanced_or_flagged() {
    for c in cases() {
        let out = fix_text(&c.raw, &c.template, &ctx(&c));
        let balanced = cxx::check_braces(&cxx::tokenize(&out.text)).is_ok() && !out.text.trim().is_empty();
        assert!(balanced || out.unfixable, "case {}", c.name);
    }
}
