use std::fs;
use std::path::{Path, PathBuf};

use testgen_core::fixtures::{self, FixtureStatus, ValidateOptions};
use walkdir::WalkDir;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn copy_tree(from: &Path, to: &Path) {
    for e in WalkDir::new(from) {
        let e = e.unwrap();
        let rel = e.path().strip_prefix(from).unwrap();
        if rel.starts_with("build") {
            continue;
        }
        let dst = to.join(rel);
        if e.file_type().is_dir() {
            fs::create_dir_all(&dst).unwrap();
        } else {
            fs::copy(e.path(), &dst).unwrap();
        }
    }
}

fn static_only() -> ValidateOptions {
    ValidateOptions { build_and_run: false, ..ValidateOptions::default() }
}

fn drift_aspects(status: &FixtureStatus) -> Vec<String> {
    match status {
        FixtureStatus::Fail { drift } => drift.iter().map(|d| d.aspect.clone()).collect(),
        _ => Vec::new(),
    }
}

#[test]
fn bundled_projects_are_discovered() {
    let found: Vec<String> = fixtures::discover(&root()).iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(found, ["mini-mpi", "mini-omp"]);
}

#[test]
fn bundled_fixtures_pass() {
    for r in fixtures::validate_fixtures(&root(), &ValidateOptions::default()) {
        match r.status {
            FixtureStatus::Pass => {}
            FixtureStatus::Skipped { reason } => eprintln!("{}: skipped: {reason}", r.name),
            FixtureStatus::Fail { drift } => {
                panic!("{}:\n{}", r.name, drift.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))
            }
        }
    }
}

#[test]
fn edited_test_is_reported_as_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mini-omp");
    copy_tree(&root().join("mini-omp"), &dir);
    assert_eq!(fixtures::validate_fixture(&dir, &static_only()).status, FixtureStatus::Pass);

    // a trailing comment explains the literal, so MNT at line 19 disappears
    let t = dir.join("tests/test_nested.cpp");
    let src = fs::read_to_string(&t).unwrap();
    fs::write(&t, src.replace("== 4);", "== 4); // last valid index")).unwrap();
    let r = fixtures::validate_fixture(&dir, &static_only());
    let FixtureStatus::Fail { drift } = r.status else { panic!("expected drift") };
    assert_eq!(drift.len(), 1);
    assert_eq!(drift[0].aspect, "smells");
    assert_eq!(drift[0].expected, "[(Mnt, 19)]");
    assert_eq!(drift[0].actual, "[]");
}

#[test]
fn edited_annotation_is_reported_as_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mini-mpi");
    copy_tree(&root().join("mini-mpi"), &dir);
    let path = dir.join("annotations.json");
    let mut notes = fixtures::load_annotations(&dir).unwrap();
    notes[1].expected_parallelism.has_reduction_test = true;
    notes[1].expected_smells.push((testgen_core::smells::SmellKind::Mnt, 500));
    fs::write(&path, serde_json::to_string_pretty(&notes).unwrap()).unwrap();
    let r = fixtures::validate_fixture(&dir, &static_only());
    let aspects = drift_aspects(&r.status);
    assert_eq!(aspects, ["annotated line", "smells", "parallelism"]);
}

#[test]
fn coverage_drift_is_caught_when_the_toolchain_exists() {
    if !testgen_core::process::on_path("g++") || !testgen_core::process::on_path("gcov") {
        eprintln!("skipped: no g++/gcov");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mini-omp");
    copy_tree(&root().join("mini-omp"), &dir);
    let mut notes = fixtures::load_annotations(&dir).unwrap();
    notes.truncate(1);
    notes[0].expected_coverage.get_mut("src/nested.cpp").unwrap().lines_executed = 15;
    fs::write(dir.join("annotations.json"), serde_json::to_string_pretty(&notes).unwrap()).unwrap();
    let r = fixtures::validate_fixture(&dir, &ValidateOptions::default());
    assert_eq!(drift_aspects(&r.status), ["coverage"]);
}

#[test]
fn broken_annotations_fail_to_load() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    copy_tree(&root().join("mini-omp"), &dir);
    fs::write(dir.join("annotations.json"), "{ not json").unwrap();
    let r = fixtures::validate_fixture(&dir, &static_only());
    assert_eq!(drift_aspects(&r.status), ["load"]);
}
