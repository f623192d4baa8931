use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 7;

/// One participant's 7-point intensity ratings of one track, in
/// (sweet, bitter, sour, salty, spicy) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub subject_id: String,
    pub track_id: String,
    pub ratings: [u8; 5],
    pub device: String,
    pub hearing_impairment: bool,
    pub taste_smell_impairment: bool,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.ratings.iter().find(|r| !(LIKERT_MIN..=LIKERT_MAX).contains(*r)) {
            return Err(Error::invalid(format!(
                "subject {} track {}: rating {r} outside {LIKERT_MIN}..={LIKERT_MAX}",
                self.subject_id, self.track_id
            )));
        }
        Ok(())
    }
}

/// Which self-reported impairments exclude a participant's ratings. Both
/// default to keeping the ratings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpairmentFilter {
    pub exclude_hearing: bool,
    pub exclude_taste_smell: bool,
}

pub fn filter_ratings(records: &[RatingRecord], filter: ImpairmentFilter) -> Vec<RatingRecord> {
    records
        .iter()
        .filter(|r| !(filter.exclude_hearing && r.hearing_impairment))
        .filter(|r| !(filter.exclude_taste_smell && r.taste_smell_impairment))
        .cloned()
        .collect()
}

/// Standardizes each column in place to mean 0 and population sd 1.
/// Constant columns are set to zero; their indices are returned.
pub fn zscore_columns<T: Scalar>(m: &mut DMatrix<T>) -> Vec<usize> {
    let n = T::count(m.nrows().max(1));
    let mut constant = Vec::new();
    for c in 0..m.ncols() {
        let mut col = m.column_mut(c);
        let mean = col.iter().copied().sum::<T>() / n;
        col.iter_mut().for_each(|v| *v = *v - mean);
        let sd = (col.iter().map(|v| *v * *v).sum::<T>() / n).sqrt();
        if sd > T::zero() {
            col.iter_mut().for_each(|v| *v = *v / sd);
        } else {
            col.fill(T::zero());
            constant.push(c);
        }
    }
    constant
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedRatings<T: Scalar> {
    pub subject_ids: Vec<String>,
    pub track_ids: Vec<String>,
    /// ratings x 5, z-scored per column
    pub values: DMatrix<T>,
    pub warnings: Vec<String>,
}

/// Validates ratings and z-scores each taste over all of them.
pub fn normalize_ratings<T: Scalar>(records: &[RatingRecord]) -> Result<NormalizedRatings<T>> {
    if records.is_empty() {
        return Err(Error::invalid("no ratings to normalize"));
    }
    for r in records {
        r.validate()?;
    }
    let mut values = DMatrix::from_fn(records.len(), 5, |i, c| T::count(usize::from(records[i].ratings[c])));
    let warnings = zscore_columns(&mut values)
        .into_iter()
        .map(|c| format!("rating column {} is constant; set to zero", crate::taste::Taste::ALL[c]))
        .collect();
    Ok(NormalizedRatings {
        subject_ids: records.iter().map(|r| r.subject_id.clone()).collect(),
        track_ids: records.iter().map(|r| r.track_id.clone()).collect(),
        values,
        warnings,
    })
}

/// Mean normalized rating vector per track.
#[derive(Clone, Debug, PartialEq)]
pub struct PerceptMatrix<T: Scalar> {
    pub track_ids: Vec<String>,
    pub values: DMatrix<T>,
    pub counts: Vec<usize>,
}

/// Averages normalized ratings per track, rows in `track_order`. Every
/// listed track needs at least one rating.
pub fn mean_percepts<T: Scalar>(ratings: &NormalizedRatings<T>, track_order: &[String]) -> Result<PerceptMatrix<T>> {
    let mut sums: BTreeMap<&str, ([T; 5], usize)> = BTreeMap::new();
    for (i, track) in ratings.track_ids.iter().enumerate() {
        let e = sums.entry(track.as_str()).or_insert(([T::zero(); 5], 0));
        for c in 0..5 {
            e.0[c] = e.0[c] + ratings.values[(i, c)];
        }
        e.1 += 1;
    }
    let mut values = DMatrix::zeros(track_order.len(), 5);
    let mut counts = Vec::with_capacity(track_order.len());
    for (row, track) in track_order.iter().enumerate() {
        let (sum, count) =
            sums.get(track.as_str()).ok_or_else(|| Error::invalid(format!("track {track} has no ratings")))?;
        for c in 0..5 {
            values[(row, c)] = sum[c] / T::count(*count);
        }
        counts.push(*count);
    }
    Ok(PerceptMatrix { track_ids: track_order.to_vec(), values, counts })
}
