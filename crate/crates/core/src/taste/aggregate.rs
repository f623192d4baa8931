use std::collections::BTreeMap;

use serde::Serialize;

use super::vector::{merge_umami, normalize, NormalizationScheme, RawTaste, RawTasteVector, TasteVector};
use crate::{Error, Result, Scalar};

/// One compound measured in one food, with classifier taste probabilities
/// over the six raw tastes.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundRecord<T: Scalar> {
    pub food_id: String,
    pub compound_id: String,
    pub concentration_mg_per_100g: T,
    pub taste_probs: [T; 6],
}

impl<T: Scalar> CompoundRecord<T> {
    pub fn validate(&self) -> Result<()> {
        let c = self.concentration_mg_per_100g;
        if !c.is_finite() || c < T::zero() {
            return Err(Error::invalid(format!(
                "compound {} in food {}: concentration must be finite and >= 0, got {c}",
                self.compound_id, self.food_id
            )));
        }
        for (t, p) in RawTaste::ALL.iter().zip(self.taste_probs) {
            if !p.is_finite() || p < T::zero() || p > T::one() {
                return Err(Error::invalid(format!(
                    "compound {} in food {}: P({t}) must lie in [0, 1], got {p}",
                    self.compound_id, self.food_id
                )));
            }
        }
        Ok(())
    }
}

/// One nutrient measured in one food. `mapped_taste` is the taste the
/// nutrient is associated with, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct NutrientRecord<T: Scalar> {
    pub food_id: String,
    pub nutrient_id: String,
    pub amount: T,
    pub mapped_taste: Option<RawTaste>,
}

impl<T: Scalar> NutrientRecord<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.amount.is_finite() || self.amount < T::zero() {
            return Err(Error::invalid(format!(
                "nutrient {} in food {}: amount must be finite and >= 0, got {}",
                self.nutrient_id, self.food_id, self.amount
            )));
        }
        Ok(())
    }
}

/// Fills `mapped_taste` from a `nutrient_id -> taste` table. Records already
/// carrying a label keep it.
pub fn apply_nutrient_map<T: Scalar>(nutrients: &mut [NutrientRecord<T>], map: &BTreeMap<String, RawTaste>) {
    for n in nutrients.iter_mut() {
        if n.mapped_taste.is_none() {
            n.mapped_taste = map.get(&n.nutrient_id).copied();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightConfig<T: Scalar> {
    /// Compound weight.
    pub alpha: T,
    /// Nutrient weight.
    pub beta: T,
    /// Weight of the mean spread term in the sweep objective.
    pub lambda_spread: T,
}

impl<T: Scalar> WeightConfig<T> {
    pub fn new(alpha: T, beta: T, lambda_spread: T) -> Result<Self> {
        let w = Self { alpha, beta, lambda_spread };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("lambda", self.lambda_spread)] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.alpha == T::zero() && self.beta == T::zero() {
            return Err(Error::invalid("alpha and beta cannot both be zero"));
        }
        Ok(())
    }
}

impl Default for WeightConfig<f64> {
    fn default() -> Self {
        Self { alpha: 0.4, beta: 1.0, lambda_spread: 10.0 }
    }
}

/// Log-weighted aggregation of one food's compounds and nutrients into the
/// six-taste space:
///
/// `W(t) = alpha * sum_i ln(1 + c_i) P(t|i) + beta * sum_j ln(1 + n_j) [tau_j = t]`
pub fn aggregate_food_vector<T: Scalar>(
    compounds: &[CompoundRecord<T>],
    nutrients: &[NutrientRecord<T>],
    w: &WeightConfig<T>,
) -> Result<RawTasteVector<T>> {
    w.validate()?;
    let food = compounds.iter().map(|c| c.food_id.as_str()).chain(nutrients.iter().map(|n| n.food_id.as_str())).next();
    if let Some(food) = food {
        let mixed = compounds.iter().any(|c| c.food_id != food) || nutrients.iter().any(|n| n.food_id != food);
        if mixed {
            return Err(Error::invalid(format!("records passed for food {food} belong to more than one food")));
        }
    }

    let mut compound_part = [T::zero(); 6];
    for c in compounds {
        c.validate()?;
        let weight = c.concentration_mg_per_100g.ln_1p();
        for (acc, p) in compound_part.iter_mut().zip(c.taste_probs) {
            *acc = *acc + weight * p;
        }
    }
    let mut nutrient_part = [T::zero(); 6];
    for n in nutrients {
        n.validate()?;
        if let Some(t) = n.mapped_taste {
            let acc = &mut nutrient_part[t.index()];
            *acc = *acc + n.amount.ln_1p();
        }
    }

    let mut out = [T::zero(); 6];
    for i in 0..6 {
        out[i] = w.alpha * compound_part[i] + w.beta * nutrient_part[i];
    }
    RawTasteVector::new(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoodProfile<T: Scalar> {
    pub food_id: String,
    pub food_group: String,
    pub vector: TasteVector<T>,
    /// No taste signal at all; kept in the bank but skipped by cluster scores.
    pub zero: bool,
}

/// Records split per food once, so repeated aggregation (the weight sweep)
/// does not regroup.
pub(crate) struct GroupedRecords<T: Scalar> {
    foods: Vec<FoodRecords<T>>,
}

struct FoodRecords<T: Scalar> {
    food_id: String,
    food_group: String,
    compounds: Vec<CompoundRecord<T>>,
    nutrients: Vec<NutrientRecord<T>>,
}

impl<T: Scalar> GroupedRecords<T> {
    pub fn new(
        compounds: &[CompoundRecord<T>],
        nutrients: &[NutrientRecord<T>],
        food_groups: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut by_food: BTreeMap<&str, FoodRecords<T>> = food_groups
            .iter()
            .map(|(food, group)| {
                let rec = FoodRecords {
                    food_id: food.clone(),
                    food_group: group.clone(),
                    compounds: Vec::new(),
                    nutrients: Vec::new(),
                };
                (food.as_str(), rec)
            })
            .collect();
        for c in compounds {
            by_food
                .get_mut(c.food_id.as_str())
                .ok_or_else(|| Error::invalid(format!("compound row for unknown food {}", c.food_id)))?
                .compounds
                .push(c.clone());
        }
        for n in nutrients {
            by_food
                .get_mut(n.food_id.as_str())
                .ok_or_else(|| Error::invalid(format!("nutrient row for unknown food {}", n.food_id)))?
                .nutrients
                .push(n.clone());
        }
        Ok(Self { foods: by_food.into_values().collect() })
    }

    pub fn len(&self) -> usize {
        self.foods.len()
    }

    pub fn profiles(&self, w: &WeightConfig<T>, scheme: NormalizationScheme) -> Result<Vec<FoodProfile<T>>> {
        self.foods
            .iter()
            .map(|f| {
                let raw = aggregate_food_vector(&f.compounds, &f.nutrients, w)?;
                let merged = normalize(&merge_umami(&raw), scheme);
                Ok(FoodProfile {
                    food_id: f.food_id.clone(),
                    food_group: f.food_group.clone(),
                    vector: merged.vector,
                    zero: merged.degenerate,
                })
            })
            .collect()
    }
}

/// Aggregates, merges and normalizes every food listed in `food_groups`
/// (`food_id -> food_group`). Output is ordered by food id.
pub fn build_food_profiles<T: Scalar>(
    compounds: &[CompoundRecord<T>],
    nutrients: &[NutrientRecord<T>],
    food_groups: &BTreeMap<String, String>,
    w: &WeightConfig<T>,
    scheme: NormalizationScheme,
) -> Result<Vec<FoodProfile<T>>> {
    GroupedRecords::new(compounds, nutrients, food_groups)?.profiles(w, scheme)
}
