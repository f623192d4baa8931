//! Horn's parallel analysis for factor retention.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::rng::task_stream;
use crate::{Error, LinalgScalar, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParallelAnalysis<T: Scalar> {
    /// Observed correlation-matrix eigenvalues, descending.
    pub observed: Vec<T>,
    /// Per-rank percentile of eigenvalues from random normal data.
    pub threshold: Vec<T>,
    /// Leading components whose observed eigenvalue beats the threshold.
    pub retained: usize,
}

/// Column-standardized `Z' Z / n`. Constant columns are rejected.
fn correlation_matrix<T: LinalgScalar>(data: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (n, p) = data.shape();
    let nf = T::count(n);
    let mut z = data.clone();
    for c in 0..p {
        let mut col = z.column_mut(c);
        let mean = col.iter().copied().sum::<T>() / nf;
        col.iter_mut().for_each(|v| *v -= mean);
        let sd = Float::sqrt(col.iter().map(|v| *v * *v).sum::<T>() / nf);
        if !(sd > T::zero()) {
            return Err(Error::degenerate(format!("column {c} has zero variance")));
        }
        col.iter_mut().for_each(|v| *v /= sd);
    }
    Ok(z.tr_mul(&z) / nf)
}

/// Eigenvalues of the correlation matrix of `data`, descending.
pub fn correlation_eigenvalues<T: LinalgScalar>(data: &DMatrix<T>) -> Result<Vec<T>> {
    let corr = correlation_matrix(data)?;
    let mut ev: Vec<T> = SymmetricEigen::new(corr).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

/// Linear-interpolated percentile (0..=100) of a sorted slice.
fn percentile<T: Scalar>(sorted: &[T], q: f64) -> T {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Horn's method: compares the observed eigenvalues with the `percentile`
/// of eigenvalues of `n_reps` standard-normal matrices of the same shape and
/// retains leading components until the first one that does not exceed its
/// threshold. Replicate `r` draws from stream `parallel-analysis#r`.
pub fn parallel_analysis<T: LinalgScalar>(
    data: &DMatrix<T>,
    n_reps: usize,
    percentile_q: f64,
    seed: u64,
) -> Result<ParallelAnalysis<T>> {
    let (n, p) = data.shape();
    if n < 3 || p < 1 {
        return Err(Error::invalid("parallel analysis needs at least 3 rows and 1 column"));
    }
    if n_reps == 0 || !(0.0..=100.0).contains(&percentile_q) {
        return Err(Error::invalid("n_reps must be positive and the percentile within [0, 100]"));
    }
    let observed = correlation_eigenvalues(data)?;
    let reps = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_stream(seed, "parallel-analysis", r as u64);
            let sim = DMatrix::from_fn(n, p, |_, _| {
                let v: f64 = StandardNormal.sample(&mut rng);
                T::lit(v)
            });
            correlation_eigenvalues(&sim)
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold: Vec<T> = (0..p)
        .map(|k| {
            let mut col: Vec<T> = reps.iter().map(|ev| ev[k]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            percentile(&col, percentile_q)
        })
        .collect();
    let retained = observed.iter().zip(&threshold).take_while(|(o, t)| o > t).count();
    Ok(ParallelAnalysis { observed, threshold, retained })
}
