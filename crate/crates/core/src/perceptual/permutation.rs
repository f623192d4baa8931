use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{add_one_p, tie_tolerance};
use crate::rng::task_stream;
use crate::{Error, Result, Scalar};

const BATCH: usize = 1000;

/// Outcome of the matched-distance permutation test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationAlignment<T: Scalar> {
    /// Mean distance between each target and the percept of its own track.
    pub observed: T,
    pub permuted_mean: T,
    pub permuted_sd: T,
    /// `(permuted_mean - observed) / permuted_sd`; positive when matched
    /// pairs are closer than chance.
    pub z: T,
    pub p: T,
    pub n_perm: usize,
    pub warnings: Vec<String>,
}

/// Mean Euclidean distance between row `i` of `a` and row `perm[i]` of `b`.
pub fn mean_matched_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, perm: &[usize]) -> T {
    let total = perm.iter().enumerate().map(|(i, &j)| super::mantel::row_distance(a, i, b, j)).sum::<T>();
    total / T::count(perm.len())
}

/// Compares the observed matched distance against `n_perm` random
/// reassignments of percepts to targets. Permutations are drawn in batches
/// from per-batch streams of `seed` and merged in batch order.
pub fn permutation_alignment<T: Scalar>(
    targets: &DMatrix<T>,
    percepts: &DMatrix<T>,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationAlignment<T>> {
    let n = targets.nrows();
    if percepts.shape() != targets.shape() {
        return Err(Error::invalid(format!(
            "targets are {}x{} but percepts are {}x{}",
            n,
            targets.ncols(),
            percepts.nrows(),
            percepts.ncols()
        )));
    }
    if n < 2 {
        return Err(Error::invalid("permutation test needs at least two stimuli"));
    }
    if n_perm == 0 {
        return Err(Error::invalid("n_perm must be positive"));
    }
    if targets.iter().chain(percepts.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("targets and percepts must be finite"));
    }
    let identity: Vec<usize> = (0..n).collect();
    let observed = mean_matched_distance(targets, percepts, &identity);
    let threshold = observed + tie_tolerance(observed);

    let n_batches = n_perm.div_ceil(BATCH);
    let batches: Vec<(usize, Vec<T>)> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let size = BATCH.min(n_perm - b * BATCH);
            let mut rng = task_stream(seed, "alignment", b as u64);
            let mut perm = identity.clone();
            let mut extreme = 0;
            let mut stats = Vec::with_capacity(size);
            for _ in 0..size {
                perm.shuffle(&mut rng);
                let d = mean_matched_distance(targets, percepts, &perm);
                if d <= threshold {
                    extreme += 1;
                }
                stats.push(d);
            }
            (extreme, stats)
        })
        .collect();

    let extreme: usize = batches.iter().map(|b| b.0).sum();
    let all: Vec<T> = batches.into_iter().flat_map(|b| b.1).collect();
    let permuted_mean = crate::stats::mean(&all);
    let permuted_sd = crate::stats::population_sd(&all);
    if !(permuted_sd > T::zero()) {
        return Err(Error::degenerate("permuted distances have zero spread; z is undefined"));
    }
    let mut warnings = Vec::new();
    if n_perm < 100 {
        warnings.push(format!("only {n_perm} permutations; p-value resolution is coarse"));
    }
    Ok(PermutationAlignment {
        observed,
        permuted_mean,
        permuted_sd,
        z: (permuted_mean - observed) / permuted_sd,
        p: add_one_p(extreme, n_perm),
        n_perm,
        warnings,
    })
}
