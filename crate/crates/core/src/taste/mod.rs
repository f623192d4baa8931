//! Five-dimensional taste vectors built from food chemistry.
//!
//! Compound concentrations and nutrient amounts are compressed with
//! `ln(1 + x)`, weighted by compound taste probabilities or nutrient taste
//! labels, and summed per food into a six-component raw vector (the five
//! shared tastes plus umami). Umami is then folded into salty and the result
//! is renormalized. The compound/nutrient weight ratio is chosen by a grid
//! sweep scoring how well food groups separate.

mod aggregate;
mod cluster;
mod sweep;
mod vector;

pub use aggregate::{
    aggregate_food_vector, apply_nutrient_map, build_food_profiles, CompoundRecord, FoodProfile, NutrientRecord,
    WeightConfig,
};
pub use cluster::{calinski_harabasz, mean_taste_spread};
pub use sweep::{default_grid, sweep_weights, SweepPoint, SweepResult, DEFAULT_LAMBDA};
pub use vector::{
    blend_dish, merge_umami, normalize, NormalizationScheme, Normalized, RawTaste, RawTasteVector, Taste, TasteVector,
};
