use std::collections::BTreeMap;

use super::vector::TasteVector;
use crate::{Error, Result, Scalar};

/// Calinski-Harabasz index of a labelled point set:
/// `[tr(B) / (k - 1)] / [tr(W) / (n - k)]`.
///
/// Zero within-group scatter makes the index unbounded; that case is
/// reported as [`Error::Degenerate`] rather than as an infinite value.
pub fn calinski_harabasz<T: Scalar, L: Ord>(points: &[TasteVector<T>], labels: &[L]) -> Result<T> {
    if points.len() != labels.len() {
        return Err(Error::invalid(format!("{} points but {} labels", points.len(), labels.len())));
    }
    let mut groups: BTreeMap<&L, Vec<&TasteVector<T>>> = BTreeMap::new();
    for (p, l) in points.iter().zip(labels) {
        groups.entry(l).or_default().push(p);
    }
    let n = points.len();
    let k = groups.len();
    if k < 2 {
        return Err(Error::invalid("Calinski-Harabasz needs at least two groups"));
    }
    if n <= k {
        return Err(Error::invalid(format!("Calinski-Harabasz needs n > k (n = {n}, k = {k})")));
    }

    let grand = centroid(points.iter());
    let mut between = T::zero();
    let mut within = T::zero();
    for members in groups.values() {
        let c = centroid(members.iter().copied());
        between = between + T::count(members.len()) * sq_dist(&c, &grand);
        for p in members {
            within = within + sq_dist(p.components(), &c);
        }
    }
    if within == T::zero() {
        return Err(Error::degenerate("zero within-group scatter: Calinski-Harabasz index is unbounded"));
    }
    Ok((between / T::count(k - 1)) / (within / T::count(n - k)))
}

/// Mean over the five tastes of the population standard deviation across
/// points.
pub fn mean_taste_spread<T: Scalar>(points: &[TasteVector<T>]) -> Result<T> {
    if points.len() < 2 {
        return Err(Error::invalid("spread needs at least two points"));
    }
    let n = T::count(points.len());
    let mean = centroid(points.iter());
    let mut total = T::zero();
    for (d, &m) in mean.iter().enumerate() {
        let var = points
            .iter()
            .map(|p| {
                let e = p.components()[d] - m;
                e * e
            })
            .sum::<T>()
            / n;
        total = total + var.sqrt();
    }
    Ok(total / T::lit(5.0))
}

fn centroid<'a, T: Scalar>(points: impl Iterator<Item = &'a TasteVector<T>>) -> [T; 5] {
    let mut acc = [T::zero(); 5];
    let mut n = 0usize;
    for p in points {
        for (a, x) in acc.iter_mut().zip(p.components()) {
            *a = *a + *x;
        }
        n += 1;
    }
    let n = T::count(n.max(1));
    acc.map(|a| a / n)
}

fn sq_dist<T: Scalar>(a: &[T; 5], b: &[T; 5]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tv(a: [f64; 5]) -> TasteVector<f64> {
        TasteVector::new(a).unwrap()
    }

    #[test]
    fn spread_examples() {
        let v = tv([0.2, 0.3, 0.1, 0.4, 0.0]);
        assert_relative_eq!(mean_taste_spread(&[v, v, v]).unwrap(), 0.0, epsilon = 1e-15);
        let pts = [tv([1.0, 0.0, 0.0, 0.0, 0.0]), tv([0.0, 1.0, 0.0, 0.0, 0.0])];
        assert_relative_eq!(mean_taste_spread(&pts).unwrap(), 0.2, epsilon = 1e-15);
        let doubled: Vec<_> = pts.iter().map(|p| p.scaled(2.0).unwrap()).collect();
        assert_relative_eq!(mean_taste_spread(&doubled).unwrap(), 0.4, epsilon = 1e-15);
        assert!(mean_taste_spread(&pts[..1]).is_err());
    }

    #[test]
    fn ch_rejects_bad_layouts() {
        let pts = [tv([1.0, 0.0, 0.0, 0.0, 0.0]), tv([0.0, 1.0, 0.0, 0.0, 0.0])];
        assert!(calinski_harabasz(&pts, &["a", "a"]).is_err());
        assert!(calinski_harabasz(&pts, &["a", "b"]).is_err());
        assert!(calinski_harabasz(&pts, &["a"]).is_err());
    }

    #[test]
    fn ch_zero_within_scatter_is_degenerate() {
        let a = tv([1.0, 0.0, 0.0, 0.0, 0.0]);
        let b = tv([0.0, 1.0, 0.0, 0.0, 0.0]);
        let err = calinski_harabasz(&[a, a, b, b], &[0, 0, 1, 1]).unwrap_err();
        assert!(err.is_degenerate());
    }

    #[test]
    fn ch_with_k_equal_n_minus_one() {
        // groups {(0,..),(2,..)} and {(10,..)} on the sweet axis:
        // centroids 1 and 10, grand mean 4; tr(B) = 2*9 + 1*36 = 54,
        // tr(W) = 1 + 1 = 2; CH = (54/1) / (2/1) = 27.
        let pts = [tv([0.0; 5]), tv([2.0, 0.0, 0.0, 0.0, 0.0]), tv([10.0, 0.0, 0.0, 0.0, 0.0])];
        assert_relative_eq!(calinski_harabasz(&pts, &["x", "x", "y"]).unwrap(), 27.0, max_relative = 1e-12);
    }
}
