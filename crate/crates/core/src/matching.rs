//! Nearest-neighbour retrieval of annotated tracks for taste targets.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::CorpusTable;
use crate::taste::{NormalizationScheme, TasteVector};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchConfig<T: Scalar> {
    pub k: usize,
    pub d_max: T,
    pub metric: Metric,
    /// Scheme both target and corpus vectors are expected to be normalized
    /// under. Vectors that do not match it raise a warning.
    pub expected_scheme: Option<NormalizationScheme>,
}

impl<T: Scalar> MatchConfig<T> {
    /// Top-1 retrieval against the diameter of the unit hypercube.
    pub fn top1() -> Self {
        Self { k: 1, d_max: T::lit(5.0).sqrt(), metric: Metric::Euclidean, expected_scheme: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchResult<T: Scalar> {
    pub target_id: String,
    pub track_id: String,
    pub distance: T,
    pub d_max: T,
    pub compatibility_pct: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchOutcome<T: Scalar> {
    pub results: Vec<MatchResult<T>>,
    pub warnings: Vec<String>,
}

pub fn euclidean_distance<T: Scalar>(a: &TasteVector<T>, b: &TasteVector<T>) -> T {
    a.components().iter().zip(b.components()).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

/// `(1 - distance / d_max) * 100`. A distance beyond `d_max` means the
/// vectors were not normalized the way `d_max` assumes and is rejected.
pub fn compatibility<T: Scalar>(distance: T, d_max: T) -> Result<T> {
    if !(d_max > T::zero()) || !d_max.is_finite() {
        return Err(Error::invalid(format!("d_max must be positive, got {d_max}")));
    }
    if !(distance >= T::zero()) || !distance.is_finite() {
        return Err(Error::invalid(format!("distance must be finite and >= 0, got {distance}")));
    }
    if distance > d_max {
        return Err(Error::invalid(format!(
            "distance {distance} exceeds d_max {d_max}; target and corpus normalization disagree"
        )));
    }
    Ok((T::one() - distance / d_max) * T::lit(100.0))
}

fn scheme_mismatch<T: Scalar>(v: &TasteVector<T>, scheme: NormalizationScheme) -> bool {
    let norm = scheme.norm(v);
    !v.is_zero() && (norm - T::one()).abs() > T::lit(1e-6)
}

/// Exhaustive scan of `corpus` for the `k` tracks closest to `target`,
/// ascending by distance with ties broken by track id.
pub fn match_target<T: Scalar>(
    target_id: &str,
    target: &TasteVector<T>,
    corpus: &CorpusTable<T>,
    config: &MatchConfig<T>,
) -> Result<MatchOutcome<T>> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot match against an empty corpus"));
    }
    if config.k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let mut warnings = Vec::new();
    if let Some(scheme) = config.expected_scheme {
        if scheme_mismatch(target, scheme) {
            warnings.push(format!("target {target_id} is not {scheme}-normalized"));
        }
        let off = (0..corpus.len()).filter(|&r| scheme_mismatch(&corpus.taste_vector(r), scheme)).count();
        if off > 0 {
            warnings.push(format!("{off} corpus rows are not {scheme}-normalized"));
        }
    }

    let mut scored: Vec<(T, usize)> = (0..corpus.len())
        .map(|r| {
            let d = match config.metric {
                Metric::Euclidean => euclidean_distance(target, &corpus.taste_vector(r)),
            };
            (d, r)
        })
        .collect();
    let order = |a: &(T, usize), b: &(T, usize)| -> Ordering {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| corpus.ids[a.1].cmp(&corpus.ids[b.1]))
    };
    let k = config.k.min(scored.len());
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_by(order);

    let results = scored
        .into_iter()
        .map(|(distance, r)| {
            Ok(MatchResult {
                target_id: target_id.to_string(),
                track_id: corpus.ids[r].clone(),
                distance,
                d_max: config.d_max,
                compatibility_pct: compatibility(distance, config.d_max)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchOutcome { results, warnings })
}

/// Runs [`match_target`] for many targets in parallel; output order follows
/// `targets`.
pub fn match_targets<T: Scalar>(
    targets: &[(String, TasteVector<T>)],
    corpus: &CorpusTable<T>,
    config: &MatchConfig<T>,
) -> Result<Vec<MatchOutcome<T>>> {
    targets.par_iter().map(|(id, v)| match_target(id, v, corpus, config)).collect()
}

/// Mean top-1 compatibility over a batch of outcomes.
pub fn mean_top_compatibility<T: Scalar>(outcomes: &[MatchOutcome<T>]) -> Option<T> {
    let tops: Vec<T> = outcomes.iter().filter_map(|o| o.results.first()).map(|r| r.compatibility_pct).collect();
    if tops.is_empty() {
        return None;
    }
    Some(tops.iter().copied().sum::<T>() / T::count(tops.len()))
}
