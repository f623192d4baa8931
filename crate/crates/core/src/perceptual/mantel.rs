use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{add_one_p, tie_tolerance};
use crate::rng::task_stream;
use crate::stats::average_ranks;
use crate::{Error, Result, Scalar};

const BATCH: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MantelMethod {
    #[default]
    Pearson,
    Spearman,
}

impl FromStr for MantelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(MantelMethod::Pearson),
            "spearman" => Ok(MantelMethod::Spearman),
            other => Err(Error::invalid(format!("unknown Mantel method {other:?}"))),
        }
    }
}

impl fmt::Display for MantelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MantelMethod::Pearson => "pearson",
            MantelMethod::Spearman => "spearman",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MantelResult<T: Scalar> {
    pub r: T,
    /// One-sided (greater) permutation p-value.
    pub p: T,
    pub n_perm: usize,
    pub method: MantelMethod,
}

/// Euclidean distances between the rows of `m`.
pub fn pairwise_distances<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| row_distance(m, i, m, j))
}

/// Euclidean distance between row `i` of `a` and row `j` of `b`.
pub(crate) fn row_distance<T: Scalar>(a: &DMatrix<T>, i: usize, b: &DMatrix<T>, j: usize) -> T {
    a.row(i).iter().zip(b.row(j).iter()).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

fn validate<T: Scalar>(d: &DMatrix<T>, label: &str) -> Result<()> {
    if !d.is_square() {
        return Err(Error::invalid(format!("{label} distance matrix is not square")));
    }
    for i in 0..d.nrows() {
        if d[(i, i)] != T::zero() {
            return Err(Error::invalid(format!("{label} distance matrix has nonzero diagonal at {i}")));
        }
        for j in 0..i {
            let (a, b) = (d[(i, j)], d[(j, i)]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::invalid(format!("{label} distance matrix has a non-finite entry at ({i}, {j})")));
            }
            if (a - b).abs() > tie_tolerance(a.abs().max(b.abs())) {
                return Err(Error::invalid(format!("{label} distance matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn upper<T: Scalar>(d: &DMatrix<T>) -> Vec<T> {
    let n = d.nrows();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(d[(i, j)]);
        }
    }
    out
}

/// Upper-triangle values mapped back into a symmetric matrix after ranking
/// or centering.
fn rebuild<T: Scalar>(n: usize, vals: &[T]) -> DMatrix<T> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = vals[k];
            m[(j, i)] = vals[k];
            k += 1;
        }
    }
    m
}

fn centered<T: Scalar>(vals: &[T]) -> Result<(Vec<T>, T)> {
    let mean = crate::stats::mean(vals);
    let c: Vec<T> = vals.iter().map(|v| *v - mean).collect();
    let norm = c.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if !(norm > T::zero()) {
        return Err(Error::degenerate("distance matrix has constant off-diagonal entries"));
    }
    Ok((c, norm))
}

fn cross<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, perm: &[usize]) -> T {
    let n = perm.len();
    let mut s = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            s = s + a[(i, j)] * b[(perm[i], perm[j])];
        }
    }
    s
}

/// Mantel test on the upper triangles of two distance matrices. Rows and
/// columns of `db` are permuted together; the p-value counts permutations
/// whose correlation is at least the observed one.
pub fn mantel<T: Scalar>(
    da: &DMatrix<T>,
    db: &DMatrix<T>,
    n_perm: usize,
    seed: u64,
    method: MantelMethod,
) -> Result<MantelResult<T>> {
    validate(da, "first")?;
    validate(db, "second")?;
    let n = da.nrows();
    if db.nrows() != n {
        return Err(Error::invalid(format!("distance matrices are {n}x{n} and {0}x{0}", db.nrows())));
    }
    if n < 3 {
        return Err(Error::invalid("Mantel test needs at least three objects"));
    }
    if n_perm == 0 {
        return Err(Error::invalid("n_perm must be positive"));
    }
    let prep = |d: &DMatrix<T>| {
        let vals = upper(d);
        match method {
            MantelMethod::Pearson => vals,
            MantelMethod::Spearman => average_ranks(&vals),
        }
    };
    let (ca, na) = centered(&prep(da))?;
    let (cb, nb) = centered(&prep(db))?;
    let a = rebuild(n, &ca);
    let b = rebuild(n, &cb);
    let scale = na * nb;

    let identity: Vec<usize> = (0..n).collect();
    let observed = cross(&a, &b, &identity);
    let threshold = observed - tie_tolerance(observed);
    let n_batches = n_perm.div_ceil(BATCH);
    let extreme: usize = (0..n_batches)
        .into_par_iter()
        .map(|k| {
            let size = BATCH.min(n_perm - k * BATCH);
            let mut rng = task_stream(seed, "mantel", k as u64);
            let mut perm = identity.clone();
            (0..size)
                .filter(|_| {
                    perm.shuffle(&mut rng);
                    cross(&a, &b, &perm) >= threshold
                })
                .count()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(MantelResult { r: observed / scale, p: add_one_p(extreme, n_perm), n_perm, method })
}
