use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::{CompoundRecord, GroupedRecords, NutrientRecord, WeightConfig};
use super::cluster::{calinski_harabasz, mean_taste_spread};
use super::vector::{NormalizationScheme, TasteVector};
use crate::{Error, Result, Scalar};

pub const DEFAULT_LAMBDA: f64 = 10.0;

/// 16 equally spaced compound/nutrient ratios 0.0, 0.2, ..., 3.0.
pub fn default_grid<T: Scalar>() -> Vec<T> {
    (0..16).map(|i| T::count(i) / T::lit(5.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint<T: Scalar> {
    pub ratio: T,
    /// `None` when the cluster score is undefined at this ratio.
    pub objective: Option<T>,
    pub ch_index: Option<T>,
    pub mean_spread: Option<T>,
    pub foods_scored: usize,
    pub zero_foods: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult<T: Scalar> {
    pub grid: Vec<SweepPoint<T>>,
    pub best_ratio: T,
    pub lambda_spread: T,
}

impl<T: Scalar> SweepResult<T> {
    pub fn best(&self) -> &SweepPoint<T> {
        self.grid.iter().find(|p| p.ratio == self.best_ratio).expect("best ratio is on the grid")
    }
}

/// Scores every compound/nutrient ratio on `grid` (alpha = ratio, beta = 1)
/// by `CH(food groups) + lambda * mean_spread` and returns the full trace
/// plus the argmax. Ties go to the smaller ratio. Zero-signal foods are left
/// out of the score.
pub fn sweep_weights<T: Scalar>(
    compounds: &[CompoundRecord<T>],
    nutrients: &[NutrientRecord<T>],
    food_groups: &BTreeMap<String, String>,
    lambda_spread: T,
    grid: &[T],
    scheme: NormalizationScheme,
) -> Result<SweepResult<T>> {
    if grid.is_empty() {
        return Err(Error::invalid("weight sweep grid is empty"));
    }
    if !lambda_spread.is_finite() || lambda_spread < T::zero() {
        return Err(Error::invalid("lambda must be finite and >= 0"));
    }
    for r in grid {
        if !r.is_finite() || *r < T::zero() {
            return Err(Error::invalid(format!("grid ratio {r} must be finite and >= 0")));
        }
    }
    let records = GroupedRecords::new(compounds, nutrients, food_groups)?;
    if records.len() < 2 {
        return Err(Error::invalid("weight sweep needs a bank of at least two foods"));
    }

    let points = grid
        .par_iter()
        .map(|&ratio| score_ratio(&records, ratio, lambda_spread, scheme))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(T, T)> = None;
    for p in &points {
        let Some(obj) = p.objective else { continue };
        best = match best {
            None => Some((p.ratio, obj)),
            Some((r, o)) if obj > o || (obj == o && p.ratio < r) => Some((p.ratio, obj)),
            keep => keep,
        };
    }
    let (best_ratio, _) =
        best.ok_or_else(|| Error::degenerate("the sweep objective is undefined at every grid ratio"))?;
    Ok(SweepResult { grid: points, best_ratio, lambda_spread })
}

fn score_ratio<T: Scalar>(
    records: &GroupedRecords<T>,
    ratio: T,
    lambda: T,
    scheme: NormalizationScheme,
) -> Result<SweepPoint<T>> {
    let w = WeightConfig { alpha: ratio, beta: T::one(), lambda_spread: lambda };
    let profiles = records.profiles(&w, scheme)?;
    let zero_foods = profiles.iter().filter(|p| p.zero).count();
    let (vectors, labels): (Vec<TasteVector<T>>, Vec<&str>) =
        profiles.iter().filter(|p| !p.zero).map(|p| (p.vector, p.food_group.as_str())).unzip();
    let mut point = SweepPoint {
        ratio,
        objective: None,
        ch_index: None,
        mean_spread: None,
        foods_scored: vectors.len(),
        zero_foods,
        note: None,
    };
    let spread = match mean_taste_spread(&vectors) {
        Ok(s) => s,
        Err(e) => {
            point.note = Some(e.to_string());
            return Ok(point);
        }
    };
    point.mean_spread = Some(spread);
    match calinski_harabasz(&vectors, &labels) {
        Ok(ch) => {
            point.ch_index = Some(ch);
            point.objective = Some(ch + lambda * spread);
        }
        Err(e) => point.note = Some(e.to_string()),
    }
    Ok(point)
}
