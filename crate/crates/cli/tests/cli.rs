use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

fn testgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_testgen")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identical_files_are_flagged_as_memorized() {
    let t = fixtures().join("mini-omp/tests/test_reduce.cpp");
    let o = testgen(&["similarity", path(&t), path(&t)]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["edit_distance"], 0);
    assert_eq!(v["normalized_similarity"], 1.0);
    assert_eq!(v["memorization_flag"], true);

    let other = fixtures().join("mini-omp/tests/test_saxpy.cpp");
    let v = json(&testgen(&["similarity", path(&t), path(&other), "--chars"]));
    assert_eq!(v["memorization_flag"], false);
    assert!(v["edit_distance"].as_u64().unwrap() > 0);
}

#[test]
fn smells_lists_findings_and_a_distribution() {
    let f = fixtures();
    let o = testgen(&["smells", "--project", path(&f.join("mini-omp/manifest.toml")), path(&f.join("mini-omp/tests/test_saxpy.cpp"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let findings: Vec<&str> = out.lines().filter(|l| l.contains(".cpp:")).collect();
    assert_eq!(findings.len(), 2, "{out}");
    assert!(findings[0].contains("test_saxpy.cpp:22: CLT"));
    assert!(findings[1].contains("test_saxpy.cpp:36: CLT"));
    let dist: serde_json::Value = serde_json::from_str(&out[out.find("\n{").unwrap() + 1..]).unwrap();
    assert_eq!(dist["n_files"], 1);
    assert_eq!(dist["per_kind"]["CLT"], 100.0);
    assert_eq!(dist["per_kind"].as_object().unwrap().len(), 15);
}

#[test]
fn config_errors_exit_two_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let manifest = fixtures().join("mini-omp/manifest.toml");
    let o = testgen(&["run", "--project", path(&manifest), "--mode", "psychic", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("psychic"));
    assert!(!out.exists());

    let o = testgen(&["ingest", "--project", path(&tmp.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = testgen(&["ingest"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ingest_lists_templates() {
    let v = json(&testgen(&["ingest", "--project", path(&fixtures().join("mini-omp/manifest.toml"))]));
    assert_eq!(v["name"], "mini-omp");
    let ids: Vec<&String> = v["templates"].as_object().unwrap().keys().collect();
    assert_eq!(ids, ["test_nested", "test_reduce", "test_saxpy"]);
}

#[test]
fn cluster_groups_message_families() {
    let tmp = tempfile::tempdir().unwrap();
    let msgs = tmp.path().join("m.txt");
    let mut text = String::new();
    for v in ["x", "y", "z"] {
        text += &format!("'{v}' was not declared in this scope\n");
        text += &format!("undefined reference to '{v}'\n");
        text += &format!("expected ';' before '{v}' token\n");
    }
    fs::write(&msgs, text).unwrap();
    let cfg = fixtures().join("configs/mini-omp.toml");
    let v = json(&testgen(&["cluster", "--config", path(&cfg), "--messages", path(&msgs), "--k", "3"]));
    assert_eq!(v["k"], 3);
    assert!(v["silhouette"].as_f64().unwrap() > 0.5);
    let sizes: Vec<u64> = v["clusters"].as_array().unwrap().iter().map(|c| c["size"].as_u64().unwrap()).collect();
    assert_eq!(sizes, [3, 3, 3]);
}

#[test]
fn validate_fixtures_static() {
    let o = testgen(&["validate-fixtures", "--root", path(&fixtures()), "--no-build"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o), "mini-mpi: pass\nmini-omp: pass\n");
}

#[test]
fn run_then_report_rebuilds_the_same_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = fixtures().join("configs/mini-omp.toml");
    let common = ["--config", path(&cfg), "--mode", "no_context", "--candidates", "1", "--out", path(&out)];
    let o = testgen(&[&["run"], &common[..]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(out.join("report.json")).unwrap();
    let tables = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(tables.starts_with("Compilation\n"));
    fs::remove_file(out.join("report.json")).unwrap();
    let o = testgen(&[&["report"], &common[..]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("report.json")).unwrap(), first);
    assert_eq!(fs::read_to_string(out.join("report.txt")).unwrap(), tables);
}
