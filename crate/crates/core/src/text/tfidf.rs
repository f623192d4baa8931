use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lowercased runs of alphanumeric characters, minus stop words.
pub fn tokenize(text: &str, stop_words: &BTreeSet<String>) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !stop_words.contains(t))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfidfConfig {
    pub min_df: usize,
    pub stop_words: BTreeSet<String>,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig { min_df: 2, stop_words: BTreeSet::new() }
    }
}

/// Sparse row with strictly increasing column indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).unzip();
        SparseRow { indices, values }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&i, v)| v * dense[i]).sum()
    }

    pub fn dot(&self, other: &SparseRow) -> f64 {
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TfidfMatrix {
    /// Sorted vocabulary; column `j` is `vocabulary[j]`.
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub rows: Vec<SparseRow>,
}

impl TfidfMatrix {
    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }
}

/// Raw term counts times smoothed idf `ln((1 + N) / (1 + df)) + 1`, rows
/// scaled to unit L2 norm. Terms in fewer than `min_df` documents are
/// dropped; documents left without terms become zero rows.
pub fn tfidf(documents: &[String], cfg: &TfidfConfig) -> Result<TfidfMatrix> {
    let tokenized: Vec<BTreeMap<String, usize>> = documents
        .iter()
        .map(|d| {
            let mut counts = BTreeMap::new();
            for t in tokenize(d, &cfg.stop_words) {
                *counts.entry(t).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &tokenized {
        for t in doc.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let vocabulary: Vec<String> =
        df.iter().filter(|(_, &c)| c >= cfg.min_df.max(1)).map(|(t, _)| t.to_string()).collect();
    if vocabulary.is_empty() {
        return Err(Error::invalid(format!("no term occurs in at least {} documents", cfg.min_df)));
    }
    let n = documents.len() as f64;
    let idf: Vec<f64> = vocabulary.iter().map(|t| ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0).collect();
    let column: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let rows = tokenized
        .iter()
        .map(|doc| {
            let mut row = SparseRow::default();
            for (t, &c) in doc {
                if let Some(&j) = column.get(t.as_str()) {
                    row.indices.push(j);
                    row.values.push(c as f64 * idf[j]);
                }
            }
            let norm = row.squared_norm().sqrt();
            if norm > 0.0 {
                row.values.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();
    Ok(TfidfMatrix { vocabulary, idf, rows })
}
