//! Clustering of compiler error messages and edit-distance similarity
//! between generated and human-written tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TestTemplate;
use crate::cxx;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("no documents to vectorize")]
    EmptyCorpus,
    #[error("k = {k} is outside 1..={n}")]
    KTooLarge { k: usize, n: usize },
    #[error("elbow search needs at least 3 candidate k values, got {0}")]
    RangeTooSmall(usize),
    #[error("k values must be strictly ascending")]
    RangeNotAscending,
    #[error("silhouette needs k >= 2, got {0}")]
    NeedTwoClusters(usize),
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("points have different dimensions")]
    DimensionMismatch,
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticVector {
    pub diagnostic_ref: String,
    pub features: BTreeMap<String, f64>,
}

impl DiagnosticVector {
    pub fn cosine(&self, other: &DiagnosticVector) -> f64 {
        self.features.iter().filter_map(|(t, w)| other.features.get(t).map(|v| w * v)).sum()
    }
}

/// Smoothed tf-idf over whitespace tokens, each vector scaled to unit
/// length. A message with no tokens gets an empty vector.
pub fn vectorize<'a>(docs: impl IntoIterator<Item = (String, &'a str)>) -> Result<Vec<DiagnosticVector>> {
    let docs: Vec<(String, Vec<&str>)> = docs.into_iter().map(|(r, m)| (r, m.split_whitespace().collect())).collect();
    if docs.is_empty() {
        return Err(DiagnosticsError::EmptyCorpus);
    }
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, toks) in &docs {
        for t in toks.iter().collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1;
        }
    }
    let out = docs
        .iter()
        .map(|(r, toks)| {
            let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
            for t in toks {
                *tf.entry(t).or_default() += 1.0;
            }
            let mut features: BTreeMap<String, f64> =
                tf.into_iter().map(|(t, c)| (t.to_string(), c * (((1.0 + n) / (1.0 + df[t] as f64)).ln() + 1.0))).collect();
            let norm = features.values().map(|w| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                features.values_mut().for_each(|w| *w /= norm);
            }
            DiagnosticVector { diagnostic_ref: r.clone(), features }
        })
        .collect();
    Ok(out)
}

/// Dense rows over the sorted vocabulary of all vectors.
pub fn dense(vectors: &[DiagnosticVector]) -> (Vec<String>, Vec<Vec<f64>>) {
    let vocab: Vec<String> = vectors.iter().flat_map(|v| v.features.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let rows = vectors
        .iter()
        .map(|v| {
            let mut row = vec![0.0; vocab.len()];
            for (t, w) in &v.features {
                row[index[t.as_str()]] = *w;
            }
            row
        })
        .collect();
    (vocab, rows)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// One Lloyd run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub history: Vec<f64>,
}

pub const MAX_ITER: usize = 300;

fn check_points(points: &[Vec<f64>], k: usize) -> Result<()> {
    if k == 0 || k > points.len() {
        return Err(DiagnosticsError::KTooLarge { k, n: points.len() });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(DiagnosticsError::DimensionMismatch);
    }
    Ok(())
}

/// k-means++ seeding followed by Lloyd iterations. Points only move to a
/// strictly closer centroid; a step that would raise inertia (rounding) ends
/// the run, so `history` never increases.
pub fn kmeans_points(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit> {
    check_points(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.len();
    let mut chosen: Vec<usize> = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && r < *d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    let mut centroids: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    let cost =
        |labels: &[usize], centroids: &[Vec<f64>]| -> f64 { points.iter().zip(labels).map(|(p, &l)| sq_dist(p, &centroids[l])).sum() };
    let mut inertia = cost(&labels, &centroids);
    let mut history = vec![inertia];
    for _ in 0..MAX_ITER {
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        let next_centroids: Vec<Vec<f64>> = (0..k)
            .map(|j| if counts[j] == 0 { centroids[j].clone() } else { sums[j].iter().map(|s| s / counts[j] as f64).collect() })
            .collect();
        let next_labels: Vec<usize> = points
            .iter()
            .zip(&labels)
            .map(|(p, &cur)| {
                let (j, d) = nearest(p, &next_centroids);
                if d < sq_dist(p, &next_centroids[cur]) {
                    j
                } else {
                    cur
                }
            })
            .collect();
        let next_inertia = cost(&next_labels, &next_centroids);
        if next_inertia > inertia {
            break;
        }
        let stable = next_labels == labels;
        centroids = next_centroids;
        labels = next_labels;
        inertia = next_inertia;
        history.push(inertia);
        if stable {
            break;
        }
    }
    Ok(KMeansFit { centroids, labels, inertia, history })
}

/// Best of `restarts` seeded runs by inertia; earlier runs win ties.
pub fn kmeans_best(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansFit> {
    check_points(points, k)?;
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| seeder.gen()).collect();
    let fits: Vec<KMeansFit> = seeds.iter().map(|&s| kmeans_points(points, k, s)).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.inertia < fits[best].inertia {
            best = i;
        }
    }
    Ok(fits.into_iter().nth(best).expect("at least one run"))
}

pub const RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub vocabulary: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    pub inertia: f64,
    /// 0 when k = 1.
    pub silhouette: f64,
    pub seed: u64,
}

pub fn kmeans(vectors: &[DiagnosticVector], k: usize, seed: u64) -> Result<ClusterModel> {
    if vectors.is_empty() {
        return Err(DiagnosticsError::EmptyCorpus);
    }
    let (vocabulary, rows) = dense(vectors);
    let fit = kmeans_best(&rows, k, seed, RESTARTS)?;
    let silhouette = if k >= 2 { silhouette_points(&rows, &fit.labels, k).unwrap_or(0.0) } else { 0.0 };
    Ok(ClusterModel {
        k,
        vocabulary,
        centroids: fit.centroids,
        assignments: vectors.iter().zip(&fit.labels).map(|(v, &l)| (v.diagnostic_ref.clone(), l)).collect(),
        inertia: fit.inertia,
        silhouette,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowResult {
    pub k: usize,
    pub curve: Vec<(usize, f64)>,
}

/// The k whose point lies furthest below the chord joining the first and
/// last points of the normalized inertia curve. Ties (within 1e-9) go to
/// the smaller k, so a straight line picks the first interior k.
pub fn select_k_elbow(points: &[Vec<f64>], ks: &[usize], seed: u64) -> Result<ElbowResult> {
    if ks.len() < 3 {
        return Err(DiagnosticsError::RangeTooSmall(ks.len()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DiagnosticsError::RangeNotAscending);
    }
    let curve: Vec<(usize, f64)> =
        ks.par_iter().map(|&k| kmeans_best(points, k, seed, RESTARTS).map(|f| (k, f.inertia))).collect::<Result<_>>()?;
    Ok(ElbowResult { k: knee(&curve), curve })
}

pub fn select_k(vectors: &[DiagnosticVector], ks: &[usize], seed: u64) -> Result<ElbowResult> {
    if vectors.is_empty() {
        return Err(DiagnosticsError::EmptyCorpus);
    }
    select_k_elbow(&dense(vectors).1, ks, seed)
}

/// Kneedle-style knee of a decreasing curve.
pub fn knee(curve: &[(usize, f64)]) -> usize {
    let (x0, y0) = (curve[0].0 as f64, curve[0].1);
    let (x1, y1) = (curve[curve.len() - 1].0 as f64, curve[curve.len() - 1].1);
    let (xs, ys) = ((x1 - x0).max(f64::MIN_POSITIVE), (y0 - y1).abs().max(f64::MIN_POSITIVE));
    let mut best = (curve[1].0, f64::NEG_INFINITY);
    for &(k, y) in &curve[1..curve.len() - 1] {
        let xn = (k as f64 - x0) / xs;
        let yn = (y - y1) / ys;
        // chord runs from (0, 1) to (1, 0)
        let gap = (1.0 - xn) - yn;
        if gap > best.1 + 1e-9 {
            best = (k, gap);
        }
    }
    best.0
}

/// Mean silhouette with Euclidean distances. Points alone in their cluster
/// score 0.
pub fn silhouette_points(points: &[Vec<f64>], labels: &[usize], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(DiagnosticsError::NeedTwoClusters(k));
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(DiagnosticsError::EmptyCluster(empty));
    }
    let scores: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, q) in points.iter().enumerate() {
                if j != i {
                    sums[labels[j]] += sq_dist(p, q).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k).filter(|&c| c != own).map(|c| sums[c] / sizes[c] as f64).fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub fn silhouette(model: &ClusterModel, vectors: &[DiagnosticVector]) -> Result<f64> {
    let (_, rows) = dense(vectors);
    let labels: Vec<usize> = vectors.iter().map(|v| model.assignments[&v.diagnostic_ref]).collect();
    silhouette_points(&rows, &labels, model.k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub size: usize,
    pub top_terms: Vec<String>,
    pub exemplar_message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub silhouette: f64,
    pub clusters: Vec<ClusterSummary>,
}

/// Per-cluster size, heaviest centroid terms and the member message
/// closest to the centroid.
pub fn cluster_report(
    model: &ClusterModel,
    vectors: &[DiagnosticVector],
    messages: &BTreeMap<String, String>,
    top: usize,
) -> ClusterReport {
    let (_, rows) = dense(vectors);
    let clusters = (0..model.k)
        .map(|id| {
            let members: Vec<usize> = (0..vectors.len()).filter(|&i| model.assignments[&vectors[i].diagnostic_ref] == id).collect();
            let c = &model.centroids[id];
            let mut terms: Vec<(usize, f64)> = c.iter().copied().enumerate().filter(|(_, w)| *w > 0.0).collect();
            terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let exemplar = members
                .iter()
                .min_by(|&&a, &&b| sq_dist(&rows[a], c).total_cmp(&sq_dist(&rows[b], c)))
                .map(|&i| messages.get(&vectors[i].diagnostic_ref).cloned().unwrap_or_default())
                .unwrap_or_default();
            ClusterSummary {
                id,
                size: members.len(),
                top_terms: terms.into_iter().take(top).map(|(i, _)| model.vocabulary[i].clone()).collect(),
                exemplar_message: exemplar,
            }
        })
        .collect();
    ClusterReport { k: model.k, silhouette: model.silhouette, clusters }
}

/// Levenshtein distance with unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    #[default]
    Tokens,
    Chars,
}

/// Lexical tokens, comments included, whitespace dropped.
pub fn lexical_tokens(text: &str) -> Vec<&str> {
    cxx::tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Sequence lengths and distance under the chosen mode.
pub fn edit_distance(a: &str, b: &str, mode: DistanceMode) -> (usize, usize, usize) {
    match mode {
        DistanceMode::Tokens => {
            let (x, y) = (lexical_tokens(a), lexical_tokens(b));
            (levenshtein(&x, &y), x.len(), y.len())
        }
        DistanceMode::Chars => {
            let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            (levenshtein(&x, &y), x.len(), y.len())
        }
    }
}

pub fn normalized_similarity(distance: usize, len_a: usize, len_b: usize) -> f64 {
    let m = len_a.max(len_b);
    if m == 0 {
        1.0
    } else {
        1.0 - distance as f64 / m as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub gen_ref: String,
    pub gold_ref: String,
    pub edit_distance: usize,
    pub normalized_similarity: f64,
    pub memorization_flag: bool,
}

pub const DEFAULT_THRESHOLD: f64 = 0.9;

pub fn score(gen_ref: &str, gen: &str, gold_ref: &str, gold: &str, mode: DistanceMode, threshold: f64) -> SimilarityScore {
    let (d, la, lb) = edit_distance(gen, gold, mode);
    let s = normalized_similarity(d, la, lb);
    SimilarityScore {
        gen_ref: gen_ref.to_string(),
        gold_ref: gold_ref.to_string(),
        edit_distance: d,
        normalized_similarity: s,
        memorization_flag: s >= threshold,
    }
}

/// The test logic of a candidate: its text minus the template prefix and
/// the entry-point closing, when present.
pub fn candidate_body<'a>(text: &'a str, template: &TestTemplate) -> &'a str {
    let prefix = template.prefix();
    let mut body = text;
    if let Some(rest) = body.strip_prefix(prefix.as_str()) {
        body = rest;
    } else if !template.entry_signature.is_empty() {
        if let Some(at) = body.find(template.entry_signature.trim()) {
            body = &body[at + template.entry_signature.trim().len()..];
            body = body.strip_prefix('\n').unwrap_or(body);
        }
    }
    let trimmed = body.trim_end_matches('\n');
    let close = template.entry_close.trim_end_matches('\n');
    if !close.is_empty() {
        if let Some(b) = trimmed.strip_suffix(close) {
            return b.strip_suffix('\n').unwrap_or(b);
        }
    }
    trimmed
}

/// One generated test to score.
#[derive(Debug, Clone)]
pub struct ScanItem<'a> {
    pub candidate_ref: &'a str,
    pub template_id: &'a str,
    pub text: &'a str,
}

/// Scores each candidate body against its own template's gold body.
/// Candidates whose template is unknown are skipped.
pub fn memorization_scan(
    items: &[ScanItem<'_>],
    templates: &BTreeMap<String, TestTemplate>,
    mode: DistanceMode,
    threshold: f64,
) -> Vec<SimilarityScore> {
    items
        .par_iter()
        .filter_map(|it| {
            let t = templates.get(it.template_id)?;
            let body = candidate_body(it.text, t);
            Some(score(it.candidate_ref, body, &t.id, &t.original_body, mode, threshold))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_messages_have_cosine_one() {
        let v = vectorize([
            ("a".to_string(), "expected ';' before 'x'"),
            ("b".to_string(), "expected ';' before 'x'"),
            ("c".to_string(), "unused variable"),
        ])
        .unwrap();
        assert_eq!(v[0].features, v[1].features);
        assert!((v[0].cosine(&v[1]) - 1.0).abs() < 1e-12);
        assert_eq!(v[0].cosine(&v[2]), 0.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(vectorize(Vec::<(String, &str)>::new()).unwrap_err(), DiagnosticsError::EmptyCorpus);
    }

    #[test]
    fn k_bounds() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(kmeans_points(&pts, 3, 1), Err(DiagnosticsError::KTooLarge { .. })));
        assert!(matches!(kmeans_points(&pts, 0, 1), Err(DiagnosticsError::KTooLarge { .. })));
    }

    #[test]
    fn one_cluster_inertia_is_total_variance() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 4.0], vec![2.0, 4.0]];
        let f = kmeans_points(&pts, 1, 7).unwrap();
        assert!((f.inertia - 20.0).abs() < 1e-12);
        let f = kmeans_points(&pts, 4, 7).unwrap();
        assert_eq!(f.inertia, 0.0);
    }

    #[test]
    fn linear_curve_picks_first_interior() {
        let curve: Vec<(usize, f64)> = (1..=6).map(|k| (k, 60.0 - 10.0 * k as f64)).collect();
        assert_eq!(knee(&curve), 2);
        assert_eq!(select_k_elbow(&[vec![0.0]], &[2, 3], 0).unwrap_err(), DiagnosticsError::RangeTooSmall(2));
    }

    #[test]
    fn silhouette_needs_two() {
        assert_eq!(silhouette_points(&[vec![0.0]], &[0], 1).unwrap_err(), DiagnosticsError::NeedTwoClusters(1));
        let s = silhouette_points(&[vec![0.0], vec![0.1], vec![5.0]], &[0, 0, 1], 2).unwrap();
        assert!(s > 0.6 && s <= 1.0);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein(b"kitten", b"sitting"), 3);
        assert_eq!(levenshtein::<u8>(b"", b"abc"), 3);
        assert_eq!(levenshtein(&["a", "b"], &["a", "b"]), 0);
        assert_eq!(normalized_similarity(0, 0, 0), 1.0);
    }

    #[test]
    fn rename_costs_one_token() {
        let (d, la, _) = edit_distance("int total = f(x);", "int sum = f(x);", DistanceMode::Tokens);
        assert_eq!((d, la), (1, 8));
        let (d, _, _) = edit_distance("int total = f(x);", "int sum = f(x);", DistanceMode::Chars);
        assert_eq!(d, 5);
    }
}
