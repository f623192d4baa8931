use nalgebra::DMatrix;
use num_traits::Float;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{add_one_p, tie_tolerance};
use crate::rng::task_stream;
use crate::{Error, LinalgScalar, Result};

const BATCH: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcrustesResult<T: LinalgScalar> {
    /// Residual sum of squares after optimal rotation of unit-scaled,
    /// centered configurations; 0 is a perfect fit, 1 no fit.
    pub m2: T,
    /// PROTEST permutation p-value.
    pub p: T,
    pub n_perm: usize,
}

fn standardize<T: LinalgScalar>(m: &DMatrix<T>, label: &str) -> Result<DMatrix<T>> {
    let n = T::count(m.nrows());
    let mut c = m.clone();
    for mut col in c.column_iter_mut() {
        let mean = col.iter().copied().sum::<T>() / n;
        col.iter_mut().for_each(|v| *v -= mean);
    }
    let norm = Float::sqrt(c.iter().map(|v| *v * *v).sum::<T>());
    if !(norm > T::zero()) {
        return Err(Error::degenerate(format!("{label} configuration has zero spread")));
    }
    Ok(c / norm)
}

fn fit<T: LinalgScalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> T {
    let trace = (x.transpose() * y).singular_values().iter().copied().sum::<T>();
    T::one() - trace * trace
}

fn check<T: LinalgScalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::invalid(format!(
            "configurations are {}x{} and {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    if x.nrows() < 3 {
        return Err(Error::invalid("Procrustes analysis needs at least three objects"));
    }
    if x.iter().chain(y.iter()).any(|v| !Float::is_finite(*v)) {
        return Err(Error::invalid("configurations must be finite"));
    }
    Ok(())
}

/// Symmetric Procrustes statistic, allowing rotations and reflections.
pub fn procrustes_m2<T: LinalgScalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<T> {
    check(x, y)?;
    Ok(fit(&standardize(x, "first")?, &standardize(y, "second")?))
}

/// Procrustes fit with a PROTEST p-value from `n_perm` row permutations of `y`.
pub fn procrustes<T: LinalgScalar>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    n_perm: usize,
    seed: u64,
) -> Result<ProcrustesResult<T>> {
    check(x, y)?;
    if n_perm == 0 {
        return Err(Error::invalid("n_perm must be positive"));
    }
    let xs = standardize(x, "first")?;
    let ys = standardize(y, "second")?;
    let m2 = fit(&xs, &ys);
    let threshold = m2 + tie_tolerance(m2);
    let n = xs.nrows();
    let n_batches = n_perm.div_ceil(BATCH);
    let extreme: usize = (0..n_batches)
        .into_par_iter()
        .map(|k| {
            let size = BATCH.min(n_perm - k * BATCH);
            let mut rng = task_stream(seed, "protest", k as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            (0..size)
                .filter(|_| {
                    perm.shuffle(&mut rng);
                    let yp = ys.select_rows(perm.iter());
                    fit(&xs, &yp) <= threshold
                })
                .count()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(ProcrustesResult { m2, p: add_one_p(extreme, n_perm), n_perm })
}
