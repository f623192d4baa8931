use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tfidf, SparseRow, TfidfConfig, TfidfMatrix};
use crate::rng::{derive_seed, task_stream, StreamRng};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k: usize,
    pub n_init: usize,
    pub max_iter: usize,
    /// Stop when the relative inertia decrease falls below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { k: 8, n_init: 10, max_iter: 300, tol: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
    pub n_iter: usize,
}

fn sq_dist(row: &SparseRow, row_norm: f64, centroid: &[f64], centroid_norm: f64) -> f64 {
    (row_norm + centroid_norm - 2.0 * row.dot_dense(centroid)).max(0.0)
}

fn dense(row: &SparseRow, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (&i, &x) in row.indices.iter().zip(&row.values) {
        v[i] = x;
    }
    v
}

fn plus_plus(rows: &[SparseRow], norms: &[f64], dim: usize, k: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![dense(&rows[rng.random_range(0..n)], dim)];
    let mut d2: Vec<f64> = vec![f64::INFINITY; n];
    while centroids.len() < k {
        let c = centroids.last().expect("at least one centroid");
        let cn: f64 = c.iter().map(|v| v * v).sum();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(&rows[i], norms[i], c, cn));
        }
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(dense(&rows[pick], dim));
    }
    centroids
}

fn assign(rows: &[SparseRow], norms: &[f64], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let cnorms: Vec<f64> = centroids.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let best: Vec<(usize, f64)> = rows
        .iter()
        .zip(norms)
        .map(|(r, &rn)| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centroids.iter().enumerate() {
                let d = sq_dist(r, rn, c, cnorms[j]);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect();
    let inertia = best.iter().map(|b| b.1).sum();
    (best.into_iter().map(|b| b.0).collect(), inertia)
}

fn lloyd(rows: &[SparseRow], norms: &[f64], dim: usize, cfg: &KMeansConfig, rng: &mut StreamRng) -> KMeansResult {
    let mut centroids = plus_plus(rows, norms, dim, cfg.k, rng);
    let (mut assignments, mut inertia) = assign(rows, norms, &centroids);
    let mut trace = vec![inertia];
    let mut n_iter = 0;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        let mut sums = vec![vec![0.0; dim]; cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (r, &a) in rows.iter().zip(&assignments) {
            counts[a] += 1;
            for (&i, &x) in r.indices.iter().zip(&r.values) {
                sums[a][i] += x;
            }
        }
        for j in 0..cfg.k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let (next, next_inertia) = assign(rows, norms, &centroids);
        trace.push(next_inertia);
        let converged = next == assignments || inertia - next_inertia <= cfg.tol * inertia;
        assignments = next;
        inertia = next_inertia;
        if converged {
            break;
        }
    }
    KMeansResult { assignments, centroids, inertia, inertia_trace: trace, n_iter }
}

/// k-means++ seeding and Lloyd iterations, best of `n_init` restarts.
/// Restart `i` draws from task stream `kmeans#i` of `seed`; ties in final
/// inertia go to the lower restart index.
pub fn kmeans(rows: &[SparseRow], dim: usize, cfg: &KMeansConfig, seed: u64) -> Result<KMeansResult> {
    if cfg.k == 0 || cfg.n_init == 0 {
        return Err(Error::invalid("k and n_init must be positive"));
    }
    if rows.len() < cfg.k {
        return Err(Error::invalid(format!("{} rows cannot form {} clusters", rows.len(), cfg.k)));
    }
    if rows.iter().any(|r| r.indices.iter().any(|&i| i >= dim) || r.values.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("rows must be finite with indices below the dimension"));
    }
    let norms: Vec<f64> = rows.iter().map(SparseRow::squared_norm).collect();
    let runs: Vec<KMeansResult> = (0..cfg.n_init)
        .into_par_iter()
        .map(|i| lloyd(rows, &norms, dim, cfg, &mut task_stream(seed, "kmeans", i as u64)))
        .collect();
    let best = runs.into_iter().reduce(|a, b| if b.inertia < a.inertia { b } else { a }).expect("n_init > 0");
    Ok(best)
}

fn mean_silhouette(rows: &[&SparseRow], labels: &[usize]) -> f64 {
    let n = rows.len();
    let distinct: BTreeSet<usize> = labels.iter().copied().collect();
    if distinct.len() < 2 || distinct.len() >= n {
        return 0.0;
    }
    let k = distinct.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let norms: Vec<f64> = rows.iter().map(|r| r.squared_norm()).collect();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            if sizes[labels[i]] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if i != j {
                    let d2 = (norms[i] + norms[j] - 2.0 * rows[i].dot(rows[j])).max(0.0);
                    sums[labels[j]] += d2.sqrt();
                }
            }
            let a = sums[labels[i]] / (sizes[labels[i]] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != labels[i] && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    total / n as f64
}

/// Mean silhouette over all points with Euclidean distances. Degenerate
/// labelings (one cluster, or every point alone) score 0, as do points in
/// singleton clusters and points whose a and b are both zero.
pub fn silhouette(rows: &[SparseRow], assignments: &[usize]) -> Result<f64> {
    if rows.len() != assignments.len() {
        return Err(Error::invalid("one assignment per row is required"));
    }
    Ok(mean_silhouette(&rows.iter().collect::<Vec<_>>(), assignments))
}

/// Silhouette of a random subset of `sample_size` points, computed within
/// that subset. Falls back to the exact value when the sample covers every
/// point.
pub fn silhouette_sampled(rows: &[SparseRow], assignments: &[usize], sample_size: usize, seed: u64) -> Result<f64> {
    if sample_size >= rows.len() {
        return silhouette(rows, assignments);
    }
    if rows.len() != assignments.len() {
        return Err(Error::invalid("one assignment per row is required"));
    }
    let mut rng = crate::rng::stream(seed, "silhouette");
    let mut picked = sample(&mut rng, rows.len(), sample_size).into_vec();
    picked.sort_unstable();
    let sub: Vec<&SparseRow> = picked.iter().map(|&i| &rows[i]).collect();
    let labels: Vec<usize> = picked.iter().map(|&i| assignments[i]).collect();
    Ok(mean_silhouette(&sub, &labels))
}

/// Highest-weight centroid terms per cluster; ties break alphabetically.
pub fn top_terms(centroids: &[Vec<f64>], vocabulary: &[String], n: usize) -> Vec<Vec<String>> {
    centroids
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0.0).collect();
            idx.sort_by(|&a, &b| c[b].partial_cmp(&c[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            idx.into_iter().take(n).map(|i| vocabulary[i].clone()).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextClusterConfig {
    pub tfidf: TfidfConfig,
    pub kmeans: KMeansConfig,
    pub top_terms: usize,
    /// Points used for the silhouette; `None` uses all of them.
    pub silhouette_sample: Option<usize>,
}

impl Default for TextClusterConfig {
    fn default() -> Self {
        TextClusterConfig {
            tfidf: TfidfConfig::default(),
            kmeans: KMeansConfig::default(),
            top_terms: 10,
            silhouette_sample: Some(10_000),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TextClusterReport {
    pub k: usize,
    pub n_documents: usize,
    pub vocabulary_size: usize,
    pub assignments: Vec<usize>,
    pub sizes: Vec<usize>,
    pub top_terms: Vec<Vec<String>>,
    pub inertia: f64,
    pub silhouette: f64,
}

impl TextClusterReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "documents: {}  vocabulary: {}  k: {}  silhouette: {:.3}\n",
            self.n_documents, self.vocabulary_size, self.k, self.silhouette
        );
        for (c, (size, terms)) in self.sizes.iter().zip(&self.top_terms).enumerate() {
            s.push_str(&format!("cluster {c} ({size}): {}\n", terms.join(", ")));
        }
        s
    }
}

/// TF-IDF, k-means and silhouette over free-text captions.
pub fn cluster_texts(texts: &[String], cfg: &TextClusterConfig, seed: u64) -> Result<TextClusterReport> {
    let TfidfMatrix { vocabulary, rows, .. } = tfidf(texts, &cfg.tfidf)?;
    let km = kmeans(&rows, vocabulary.len(), &cfg.kmeans, derive_seed(seed, "text-kmeans"))?;
    let silhouette = match cfg.silhouette_sample {
        Some(m) => silhouette_sampled(&rows, &km.assignments, m, derive_seed(seed, "text-silhouette"))?,
        None => silhouette(&rows, &km.assignments)?,
    };
    let mut sizes = vec![0; cfg.kmeans.k];
    for &a in &km.assignments {
        sizes[a] += 1;
    }
    Ok(TextClusterReport {
        k: cfg.kmeans.k,
        n_documents: texts.len(),
        vocabulary_size: vocabulary.len(),
        top_terms: top_terms(&km.centroids, &vocabulary, cfg.top_terms),
        assignments: km.assignments,
        sizes,
        inertia: km.inertia,
        silhouette,
    })
}
