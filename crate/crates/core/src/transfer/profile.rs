use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::CorpusTable;
use crate::stats::{spearman, Correlation};
use crate::taste::Taste;
use crate::{Error, Result, Scalar};

/// Spearman correlation of every feature with every flavor (`p x 5`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationProfile<T: Scalar> {
    pub feature_names: Vec<String>,
    pub entries: Vec<[Correlation<T>; 5]>,
}

impl<T: Scalar> CorrelationProfile<T> {
    pub fn rho(&self, feature: usize, taste: Taste) -> T {
        self.entries[feature][taste.index()].rho
    }

    pub fn column(&self, taste: Taste) -> Vec<T> {
        self.entries.iter().map(|e| e[taste.index()].rho).collect()
    }

    /// Profile with every rho negated.
    pub fn negated(&self) -> Self {
        let entries = self.entries.iter().map(|row| row.map(|c| Correlation { rho: -c.rho, p: c.p })).collect();
        Self { feature_names: self.feature_names.clone(), entries }
    }
}

pub fn correlation_profile<T: Scalar>(corpus: &CorpusTable<T>) -> Result<CorrelationProfile<T>> {
    let flavors: Vec<Vec<T>> = Taste::ALL.iter().map(|t| corpus.flavor_column(*t)).collect();
    let entries = (0..corpus.feature_names.len())
        .into_par_iter()
        .map(|i| {
            let x = corpus.feature_column(i);
            let mut row = [Correlation { rho: T::zero(), p: T::one() }; 5];
            for (slot, y) in row.iter_mut().zip(&flavors) {
                *slot = spearman(&x, y)?;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationProfile { feature_names: corpus.feature_names.clone(), entries })
}

fn check_aligned<T: Scalar>(a: &CorrelationProfile<T>, b: &CorrelationProfile<T>) -> Result<()> {
    if a.feature_names != b.feature_names {
        return Err(Error::invalid("correlation profiles are over different feature lists"));
    }
    Ok(())
}

/// Per flavor, Spearman correlation between the two profiles' columns.
pub fn correlation_transfer<T: Scalar>(
    a: &CorrelationProfile<T>,
    b: &CorrelationProfile<T>,
) -> Result<[Correlation<T>; 5]> {
    check_aligned(a, b)?;
    let mut out = [Correlation { rho: T::zero(), p: T::one() }; 5];
    for (slot, t) in out.iter_mut().zip(Taste::ALL) {
        *slot = spearman(&a.column(t), &b.column(t))?;
    }
    Ok(out)
}

/// Spearman correlation between two importance vectors.
pub fn importance_transfer<T: Scalar>(a: &[T], b: &[T]) -> Result<Correlation<T>> {
    spearman(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignAgreement {
    pub agree: usize,
    pub total: usize,
    /// Indices of the features selected per flavor, strongest first.
    pub selected: Vec<Vec<usize>>,
    pub per_flavor: Vec<usize>,
}

fn sign<T: Scalar>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// For each flavor, takes the `top_k` features with the largest `|rho|` in
/// `anchor` (ties to the lower feature index) and counts how many have the
/// same correlation sign in `other`.
pub fn sign_agreement<T: Scalar>(
    anchor: &CorrelationProfile<T>,
    other: &CorrelationProfile<T>,
    top_k: usize,
) -> Result<SignAgreement> {
    check_aligned(anchor, other)?;
    let k = top_k.min(anchor.entries.len());
    let mut agree = 0;
    let mut selected = Vec::with_capacity(5);
    let mut per_flavor = Vec::with_capacity(5);
    for t in Taste::ALL {
        let mut idx: Vec<usize> = (0..anchor.entries.len()).collect();
        idx.sort_by(|&i, &j| {
            let (a, b) = (anchor.rho(i, t).abs(), anchor.rho(j, t).abs());
            b.partial_cmp(&a).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
        });
        idx.truncate(k);
        let hits = idx.iter().filter(|&&i| sign(anchor.rho(i, t)) == sign(other.rho(i, t))).count();
        agree += hits;
        per_flavor.push(hits);
        selected.push(idx);
    }
    Ok(SignAgreement { agree, total: 5 * k, selected, per_flavor })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(rows: &[[f64; 5]]) -> CorrelationProfile<f64> {
        CorrelationProfile {
            feature_names: (0..rows.len()).map(|i| format!("f{i}")).collect(),
            entries: rows.iter().map(|r| r.map(|rho| Correlation { rho, p: 0.5 })).collect(),
        }
    }

    #[test]
    fn sign_agreement_toy() {
        // three features; top-2 per flavor by |rho| in A
        let a = profile(&[[0.9, -0.1, 0.3, 0.0, 0.5], [-0.5, 0.8, -0.2, 0.4, -0.6], [0.1, 0.2, 0.7, -0.9, 0.05]]);
        let b = profile(&[[0.2, 0.3, -0.1, 0.1, 0.4], [0.1, 0.5, -0.3, -0.2, -0.1], [0.3, -0.4, 0.6, -0.1, 0.2]]);
        // sweet: f0(+,+) f1(-,+) -> 1; bitter: f1(+,+) f2(+,-) -> 1;
        // sour: f2(+,+) f0(+,-) -> 1; salty: f2(-,-) f1(+,-) -> 1;
        // spicy: f1(-,-) f0(+,+) -> 2
        let s = sign_agreement(&a, &b, 2).unwrap();
        assert_eq!((s.agree, s.total), (6, 10));
        assert_eq!(s.per_flavor, vec![1, 1, 1, 1, 2]);
        assert_eq!(s.selected[0], vec![0, 1]);
    }

    #[test]
    fn sign_agreement_identity_and_negation() {
        let rows: Vec<[f64; 5]> = (0..8).map(|i| std::array::from_fn(|t| ((i * 5 + t) as f64 * 0.37).sin())).collect();
        let a = profile(&rows);
        let s = sign_agreement(&a, &a, 5).unwrap();
        assert_eq!((s.agree, s.total), (25, 25));
        let s = sign_agreement(&a, &a.negated(), 5).unwrap();
        assert_eq!((s.agree, s.total), (0, 25));
    }

    #[test]
    fn transfer_of_identical_profiles_is_one() {
        let rows: Vec<[f64; 5]> =
            (0..10).map(|i| std::array::from_fn(|t| ((i * 7 + t * 3) as f64 * 0.91).cos())).collect();
        let a = profile(&rows);
        for c in correlation_transfer(&a, &a).unwrap() {
            assert!((c.rho - 1.0).abs() < 1e-12);
        }
        let mut b = a.clone();
        b.feature_names[0] = "other".into();
        assert!(correlation_transfer(&a, &b).is_err());
    }
}
