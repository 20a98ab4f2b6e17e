use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testgen_core::corpus::{load_manifest, load_templates, TestTemplate};
use testgen_core::diagnostics::*;

mod common;
use common::diag::*;

#[test]
fn planted_families_give_an_elbow_at_three() {
    let ks: Vec<usize> = (1..=10).collect();
    let mut hits = 0;
    let mut misses = Vec::new();
    let mut min_sil = f64::INFINITY;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let (docs, truth) = planted_corpus(&mut rng, 20);
        let vs = vectors(&docs);
        let (_, rows) = dense(&vs);
        let elbow = select_k(&vs, &ks, trial).unwrap();
        if elbow.k == 3 {
            hits += 1;
        } else {
            misses.push((trial, elbow.k));
        }
        for k in [2, 3, 5] {
            let fit = kmeans_points(&rows, k, trial).unwrap();
            assert!(fit.history.windows(2).all(|w| w[1] <= w[0]), "trial {trial} k={k}: {:?}", fit.history);
        }
        let model = kmeans(&vs, 3, trial).unwrap();
        min_sil = min_sil.min(model.silhouette);
        assert!(model.silhouette > 0.5, "trial {trial}: {}", model.silhouette);
        // clusters recover the families
        let mut pairs = BTreeMap::new();
        for (v, f) in vs.iter().zip(&truth) {
            pairs.entry(model.assignments[&v.diagnostic_ref]).or_insert_with(Vec::new).push(*f);
        }
        assert_eq!(pairs.len(), 3);
        for fams in pairs.values() {
            assert!(fams.iter().all(|f| *f == fams[0]));
        }
    }
    println!("elbow hits {hits}/100, lowest silhouette {min_sil:.3}");
    assert!(hits >= 95, "{hits}/100, misses {misses:?}");
}

#[test]
fn intra_family_cosine_beats_inter_family() {
    let docs = [
        ("a1", "missing #pragma omp parallel before loop"),
        ("a2", "missing #pragma omp for before loop"),
        ("b1", "<id> undeclared identifier in scope"),
        ("b2", "use of undeclared identifier <id>"),
    ];
    let vs = vectorize(docs.iter().map(|(r, m)| (r.to_string(), *m))).unwrap();
    assert!(vs[0].cosine(&vs[1]) > vs[0].cosine(&vs[2]));
    assert!(vs[2].cosine(&vs[3]) > vs[1].cosine(&vs[3]));
    for v in &vs {
        assert!(v.features.values().all(|w| *w >= 0.0));
        assert!((v.features.values().map(|w| w * w).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn model_invariants_and_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (docs, _) = planted_corpus(&mut rng, 15);
    let vs = vectors(&docs);
    let (_, rows) = dense(&vs);
    for k in 1..=6 {
        let m = kmeans(&vs, k, 42).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), serde_json::to_string(&kmeans(&vs, k, 42).unwrap()).unwrap());
        let mut inertia = 0.0;
        for (v, row) in vs.iter().zip(&rows) {
            let d: Vec<f64> = m.centroids.iter().map(|c| c.iter().zip(row).map(|(x, y)| (x - y) * (x - y)).sum()).collect();
            let own = d[m.assignments[&v.diagnostic_ref]];
            assert!(d.iter().all(|x| own <= *x + 1e-12));
            inertia += own;
        }
        assert!((inertia - m.inertia).abs() < 1e-9);
        assert!((-1.0..=1.0).contains(&m.silhouette));
    }
}

#[test]
fn two_groups_recover_ground_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pts = Vec::new();
    for g in 0..2 {
        for _ in 0..25 {
            pts.push(vec![g as f64 * 10.0 + rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1]);
        }
    }
    let fit = kmeans_points(&pts, 2, 3).unwrap();
    assert!(fit.labels[..25].iter().all(|l| *l == fit.labels[0]));
    assert!(fit.labels[25..].iter().all(|l| *l == fit.labels[25]));
    assert_ne!(fit.labels[0], fit.labels[25]);
    assert!(silhouette_points(&pts, &fit.labels, 2).unwrap() > 0.9);
}

#[test]
fn random_labels_on_one_blob_score_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<Vec<f64>> = (0..400).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let labels: Vec<usize> = (0..400).map(|_| rng.gen_range(0..3)).collect();
    let s = silhouette_points(&pts, &labels, 3).unwrap();
    assert!(s.abs() < 0.15, "{s}");
}

#[test]
fn singleton_points_score_zero() {
    let pts = vec![vec![0.0], vec![0.0], vec![1.0]];
    let s = silhouette_points(&pts, &[0, 0, 1], 2).unwrap();
    // two identical points: a = 0, b = 1 -> 1 each; singleton -> 0
    assert!((s - 2.0 / 3.0).abs() < 1e-12);
    assert!(matches!(silhouette_points(&pts, &[0, 0, 0], 2), Err(DiagnosticsError::EmptyCluster(1))));
}

#[test]
fn elbow_contract() {
    let pts = vec![vec![0.0]; 5];
    assert_eq!(select_k_elbow(&pts, &[2, 3], 0).unwrap_err(), DiagnosticsError::RangeTooSmall(2));
    assert_eq!(select_k_elbow(&pts, &[3, 2, 4], 0).unwrap_err(), DiagnosticsError::RangeNotAscending);
    let linear: Vec<(usize, f64)> = (2..=8).map(|k| (k, 100.0 - 7.0 * k as f64)).collect();
    assert_eq!(knee(&linear), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn levenshtein_matches_full_table_and_is_a_metric(a in token_seq(40), b in token_seq(40), c in token_seq(40)) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, dp_oracle(&a, &b));
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        // the same pair as text goes through the lexer
        let (d, la, lb) = edit_distance(&a.join(" "), &b.join(" "), DistanceMode::Tokens);
        prop_assert_eq!((d, la, lb), (ab, a.len(), b.len()));
        let s = normalized_similarity(d, la, lb);
        prop_assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn identity_and_empty() {
    let t = "int main() { return 0; }";
    assert_eq!(edit_distance(t, t, DistanceMode::Tokens).0, 0);
    let (d, la, lb) = edit_distance(t, "", DistanceMode::Tokens);
    assert_eq!((d, la, lb), (9, 9, 0));
    let s = score("g", "", "h", "", DistanceMode::Tokens, DEFAULT_THRESHOLD);
    assert_eq!(s.normalized_similarity, 1.0);
    assert!(s.memorization_flag);
}

#[test]
fn three_edits_in_two_hundred_tokens() {
    let gold: Vec<String> =
        (0..50).map(|i| format!("v{i} = f ( )")).flat_map(|s| s.split(' ').map(String::from).collect::<Vec<_>>()).collect();
    assert_eq!(gold.len(), 250);
    let gold: Vec<String> = gold.into_iter().take(200).collect();
    let mut gen = gold.clone();
    gen[10] = "renamed".into();
    gen[100] = "other".into();
    gen[150] = "third".into();
    let s = score("g", &gen.join(" "), "t", &gold.join(" "), DistanceMode::Tokens, DEFAULT_THRESHOLD);
    assert_eq!(s.edit_distance, 3);
    assert!((s.normalized_similarity - 0.985).abs() < 1e-12);
    assert!(s.memorization_flag);
}

fn mini_omp_templates() -> BTreeMap<String, TestTemplate> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini-omp");
    let m = load_manifest(&root.join("manifest.toml")).unwrap();
    load_templates(&m).unwrap().into_iter().map(|t| (t.id.clone(), t)).collect()
}

#[test]
fn memorization_scan_against_gold() {
    let templates = mini_omp_templates();
    assert!(templates.len() >= 3);
    let copies: Vec<(String, String, String)> = templates.values().map(|t| (format!("{}-copy", t.id), t.id.clone(), t.render())).collect();
    let mut items: Vec<ScanItem<'_>> = copies.iter().map(|(r, t, x)| ScanItem { candidate_ref: r, template_id: t, text: x }).collect();
    let unrelated = "#include <cstdio>\nint main() {\n  int hits = 0;\n  for (int i = 0; i < 3; ++i) hits += i;\n  std::printf(\"%d\\n\", hits);\n  return hits == 3 ? 0 : 1;\n}\n";
    let first = templates.keys().next().unwrap().clone();
    items.push(ScanItem { candidate_ref: "unrelated", template_id: &first, text: unrelated });
    items.push(ScanItem { candidate_ref: "orphan", template_id: "no-such-template", text: unrelated });
    let scores = memorization_scan(&items, &templates, DistanceMode::Tokens, DEFAULT_THRESHOLD);
    assert_eq!(scores.len(), templates.len() + 1);
    for s in &scores {
        if s.gen_ref == "unrelated" {
            assert!(s.normalized_similarity < DEFAULT_THRESHOLD && !s.memorization_flag, "{s:?}");
        } else {
            assert_eq!(s.edit_distance, 0);
            assert_eq!(s.normalized_similarity, 1.0);
            assert!(s.memorization_flag);
        }
    }
}

#[test]
fn cluster_report_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (docs, _) = planted_corpus(&mut rng, 10);
    let vs = vectors(&docs);
    let model = kmeans(&vs, 3, 1).unwrap();
    let msgs: BTreeMap<String, String> = docs.iter().cloned().collect();
    let rep = cluster_report(&model, &vs, &msgs, 5);
    assert_eq!(rep.clusters.iter().map(|c| c.size).sum::<usize>(), 30);
    let json = serde_json::to_value(&rep).unwrap();
    for key in ["k", "silhouette", "clusters"] {
        assert!(json.get(key).is_some());
    }
    for c in &rep.clusters {
        assert!(!c.top_terms.is_empty() && c.top_terms.len() <= 5);
        assert!(msgs.values().any(|m| *m == c.exemplar_message));
    }
}
