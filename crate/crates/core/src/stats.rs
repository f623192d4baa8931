//! Rank and correlation primitives shared by the analysis modules.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation<T: Scalar> {
    pub rho: T,
    /// Two-sided p-value.
    pub p: T,
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold ranks i+1..=j
        let rank = T::count(i + 1 + j) / T::lit(2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Sizes of the groups of tied values (singletons included).
pub fn tie_sizes<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i);
        i = j;
    }
    sizes
}

pub fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::count(x.len().max(1))
}

/// Population (1/N) standard deviation.
pub fn population_sd<T: Scalar>(x: &[T]) -> T {
    let m = mean(x);
    (x.iter().map(|v| (*v - m) * (*v - m)).sum::<T>() / T::count(x.len().max(1))).sqrt()
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "pearson inputs must have equal length");
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (a, b) in x.iter().zip(y) {
        let dx = *a - mx;
        let dy = *b - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Two-sided p-value of a correlation coefficient through the Student t
/// approximation with `n - 2` degrees of freedom.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Spearman rank correlation with average ranks for ties and a t-approximate
/// two-sided p-value. A constant input has no rank order: it yields
/// `rho = 0, p = 1`.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<Correlation<T>> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("spearman inputs differ in length ({} vs {})", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::invalid("spearman needs at least three pairs"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("spearman inputs must be finite"));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    Ok(match pearson(&rx, &ry) {
        Some(rho) => Correlation { rho, p: T::lit(correlation_p_value(rho.as_f64(), x.len())) },
        None => Correlation { rho: T::zero(), p: T::one() },
    })
}

/// Exact two-sided permutation p-value of Spearman's rho, enumerating all
/// `n!` pairings. Limited to `n <= 10`.
pub fn spearman_exact_p<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let observed = spearman(x, y)?.rho;
    let n = x.len();
    if n > 10 {
        return Err(Error::invalid("exact spearman p is limited to n <= 10"));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let tol = T::lit(1e-12);
    let mut extreme = 0u64;
    let mut total = 0u64;
    for_each_permutation(n, |perm| {
        let permuted: Vec<T> = perm.iter().map(|&i| ry[i]).collect();
        let r = pearson(&rx, &permuted).unwrap_or(T::zero());
        if r.abs() >= observed.abs() - tol {
            extreme += 1;
        }
        total += 1;
    });
    Ok(T::count(extreme as usize) / T::count(total as usize))
}

/// Upper-tail probability of a chi-square variable.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("df > 0").sf(x)
}

/// Two-sided standard-normal p-value of a z statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * n.sf(z.abs())).min(1.0)
}

/// Calls `f` once for every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
