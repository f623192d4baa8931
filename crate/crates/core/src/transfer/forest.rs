//! Depth-limited CART regression forests with impurity-based (MDI) or
//! out-of-bag permutation feature importances.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{task_stream, StreamRng};
use crate::{Error, Result, Scalar};

/// How a fitted tree scores its features.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceKind {
    /// Total squared-error decrease of the splits on each feature.
    #[default]
    Mdi,
    /// Increase in out-of-bag mean squared error when the feature's values
    /// are shuffled among the out-of-bag rows.
    Permutation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    /// Outer bootstrap iterations; importances are averaged over them.
    pub n_boot: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    /// Rows drawn without replacement per iteration when the data is larger.
    pub subsample: Option<usize>,
    /// Candidate features per split; `None` means `max(1, p / 3)`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub importance: ImportanceKind,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_boot: 30,
            n_trees: 30,
            max_depth: 8,
            subsample: Some(5000),
            max_features: None,
            min_samples_split: 2,
            importance: ImportanceKind::Mdi,
        }
    }
}

impl ForestConfig {
    fn candidates(&self, p: usize) -> usize {
        self.max_features.unwrap_or(p / 3).clamp(1, p)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node<T: Scalar> {
    Leaf { value: T },
    Split { feature: usize, threshold: T, left: usize, right: usize },
}

/// Regression tree grown by greedy variance reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree<T: Scalar> {
    nodes: Vec<Node<T>>,
    /// Total squared-error decrease credited to each feature.
    impurity_decrease: Vec<T>,
}

struct Grower<'a, T: Scalar> {
    x: &'a DMatrix<T>,
    y: &'a [T],
    n_candidates: usize,
    max_depth: usize,
    min_samples_split: usize,
    nodes: Vec<Node<T>>,
    decrease: Vec<T>,
}

struct BestSplit<T> {
    feature: usize,
    threshold: T,
    gain: T,
}

impl<'a, T: Scalar> Grower<'a, T> {
    fn sse(&self, rows: &[usize]) -> (T, T) {
        let n = T::count(rows.len());
        let sum: T = rows.iter().map(|&r| self.y[r]).sum();
        let mean = sum / n;
        let sse = rows.iter().map(|&r| (self.y[r] - mean) * (self.y[r] - mean)).sum();
        (mean, sse)
    }

    fn best_split(&self, rows: &[usize], parent_sse: T, rng: &mut StreamRng) -> Option<BestSplit<T>> {
        let p = self.x.ncols();
        let n = rows.len();
        let mut best: Option<BestSplit<T>> = None;
        let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
        for feature in sample(rng, p, self.n_candidates).into_iter() {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x[(r, feature)], self.y[r])));
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let total: T = pairs.iter().map(|p| p.1).sum();
            let total_sq: T = pairs.iter().map(|p| p.1 * p.1).sum();
            let mut left = T::zero();
            let mut left_sq = T::zero();
            for i in 0..n - 1 {
                left = left + pairs[i].1;
                left_sq = left_sq + pairs[i].1 * pairs[i].1;
                if pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let nl = T::count(i + 1);
                let nr = T::count(n - i - 1);
                let right = total - left;
                let right_sq = total_sq - left_sq;
                let child_sse = (left_sq - left * left / nl) + (right_sq - right * right / nr);
                let gain = parent_sse - child_sse;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let threshold = (pairs[i].0 + pairs[i + 1].0) / T::lit(2.0);
                    best = Some(BestSplit { feature, threshold, gain });
                }
            }
        }
        best.filter(|b| b.gain > parent_sse * T::lit(1e-12) && b.gain > T::zero())
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut StreamRng) -> usize {
        let (mean, sse) = self.sse(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });
        if depth >= self.max_depth || rows.len() < self.min_samples_split || sse <= T::zero() {
            return id;
        }
        let Some(split) = self.best_split(rows, sse, rng) else {
            return id;
        };
        self.decrease[split.feature] = self.decrease[split.feature] + split.gain;
        let mut cut = 0;
        for i in 0..rows.len() {
            if self.x[(rows[i], split.feature)] <= split.threshold {
                rows.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = rows.split_at_mut(cut);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

impl<T: Scalar> RegressionTree<T> {
    /// Grows a tree on the given rows (duplicates allowed, as in a bootstrap
    /// sample).
    pub fn fit(x: &DMatrix<T>, y: &[T], rows: &[usize], cfg: &ForestConfig, rng: &mut StreamRng) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("cannot grow a tree on zero rows"));
        }
        let mut grower = Grower {
            x,
            y,
            n_candidates: cfg.candidates(x.ncols()),
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split.max(2),
            nodes: Vec::new(),
            decrease: vec![T::zero(); x.ncols()],
        };
        let mut rows = rows.to_vec();
        grower.grow(&mut rows, 0, rng);
        Ok(Self { nodes: grower.nodes, impurity_decrease: grower.decrease })
    }

    pub fn predict(&self, row: &[T]) -> T {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T: Scalar>(nodes: &[Node<T>], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Impurity decreases scaled to sum to one; `None` for a tree that never
    /// split.
    pub fn normalized_importance(&self) -> Option<Vec<T>> {
        scale_to_unit(self.impurity_decrease.clone())
    }

    /// Per-feature increase in mean squared error over `rows` when that
    /// feature's values are shuffled among them, floored at zero and scaled
    /// to sum to one; `None` when no shuffle hurts the fit.
    pub fn permutation_importance(
        &self,
        x: &DMatrix<T>,
        y: &[T],
        rows: &[usize],
        rng: &mut StreamRng,
    ) -> Option<Vec<T>> {
        if rows.len() < 2 {
            return None;
        }
        let n = T::count(rows.len());
        let mut data: Vec<Vec<T>> = rows.iter().map(|&r| x.row(r).iter().copied().collect()).collect();
        let mse = |data: &[Vec<T>]| {
            data.iter().zip(rows).map(|(row, &r)| (self.predict(row) - y[r]) * (self.predict(row) - y[r])).sum::<T>()
                / n
        };
        let base = mse(&data);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut increase = Vec::with_capacity(x.ncols());
        for j in 0..x.ncols() {
            order.shuffle(rng);
            for (k, &src) in order.iter().enumerate() {
                data[k][j] = x[(rows[src], j)];
            }
            increase.push((mse(&data) - base).max(T::zero()));
            for (k, &r) in rows.iter().enumerate() {
                data[k][j] = x[(r, j)];
            }
        }
        scale_to_unit(increase)
    }
}

fn scale_to_unit<T: Scalar>(v: Vec<T>) -> Option<Vec<T>> {
    let total: T = v.iter().copied().sum();
    (total > T::zero()).then(|| v.into_iter().map(|d| d / total).collect())
}

fn forest_importance<T: Scalar>(
    x: &DMatrix<T>,
    y: &[T],
    rows: &[usize],
    cfg: &ForestConfig,
    rng: &mut StreamRng,
) -> Result<Option<Vec<T>>> {
    let p = x.ncols();
    let mut acc = vec![T::zero(); p];
    let mut grown = 0usize;
    for _ in 0..cfg.n_trees {
        let picks: Vec<usize> = (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect();
        let boot: Vec<usize> = picks.iter().map(|&i| rows[i]).collect();
        let tree = RegressionTree::fit(x, y, &boot, cfg, rng)?;
        let imp = match cfg.importance {
            ImportanceKind::Mdi => tree.normalized_importance(),
            ImportanceKind::Permutation => {
                let mut in_bag = vec![false; rows.len()];
                for &i in &picks {
                    in_bag[i] = true;
                }
                let oob: Vec<usize> = (0..rows.len()).filter(|&i| !in_bag[i]).map(|i| rows[i]).collect();
                tree.permutation_importance(x, y, &oob, rng)
            }
        };
        if let Some(imp) = imp {
            for (a, v) in acc.iter_mut().zip(imp) {
                *a = *a + v;
            }
            grown += 1;
        }
    }
    if grown == 0 {
        return Ok(None);
    }
    let total: T = acc.iter().copied().sum();
    Ok(Some(acc.into_iter().map(|a| a / total).collect()))
}

/// Mean over `n_boot` iterations of normalized importances (MDI or
/// out-of-bag permutation, per `cfg.importance`) from a regression forest. Each iteration works on a fresh row sample: a draw
/// without replacement of `subsample` rows when the data is larger than
/// that, otherwise a bootstrap resample of all rows. Iteration `b` uses
/// random stream `rf#b` of `seed`, so results do not depend on thread
/// scheduling.
pub fn rf_importance<T: Scalar>(x: &DMatrix<T>, y: &[T], cfg: &ForestConfig, seed: u64) -> Result<Vec<T>> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::invalid(format!("{} target values for {} rows", y.len(), n)));
    }
    if n < 2 || x.ncols() == 0 {
        return Err(Error::invalid("forest needs at least two rows and one feature"));
    }
    if cfg.n_boot == 0 || cfg.n_trees == 0 || cfg.max_depth == 0 {
        return Err(Error::invalid("n_boot, n_trees and max_depth must be positive"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("forest inputs must be finite"));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::invalid("regression target is constant"));
    }

    let per_iter = (0..cfg.n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = task_stream(seed, "rf", b as u64);
            let rows: Vec<usize> = match cfg.subsample {
                Some(m) if n > m => sample(&mut rng, n, m).into_vec(),
                _ => (0..n).map(|_| rng.random_range(0..n)).collect(),
            };
            forest_importance(x, y, &rows, cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut acc = vec![T::zero(); x.ncols()];
    let mut used = 0usize;
    for imp in per_iter.into_iter().flatten() {
        for (a, v) in acc.iter_mut().zip(imp) {
            *a = *a + v;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::degenerate("no tree in any iteration found a split"));
    }
    Ok(acc.into_iter().map(|a| a / T::count(used)).collect())
}
