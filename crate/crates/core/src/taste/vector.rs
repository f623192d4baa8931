use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taste {
    Sweet,
    Bitter,
    Sour,
    Salty,
    Spicy,
}

impl Taste {
    pub const ALL: [Taste; 5] = [Taste::Sweet, Taste::Bitter, Taste::Sour, Taste::Salty, Taste::Spicy];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Taste::Sweet => "sweet",
            Taste::Bitter => "bitter",
            Taste::Sour => "sour",
            Taste::Salty => "salty",
            Taste::Spicy => "spicy",
        }
    }
}

impl fmt::Display for Taste {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The six-taste space compound classifiers and nutrient maps speak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawTaste {
    Sweet,
    Bitter,
    Sour,
    Salty,
    Spicy,
    Umami,
}

impl RawTaste {
    pub const ALL: [RawTaste; 6] =
        [RawTaste::Sweet, RawTaste::Bitter, RawTaste::Sour, RawTaste::Salty, RawTaste::Spicy, RawTaste::Umami];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RawTaste::Sweet => "sweet",
            RawTaste::Bitter => "bitter",
            RawTaste::Sour => "sour",
            RawTaste::Salty => "salty",
            RawTaste::Spicy => "spicy",
            RawTaste::Umami => "umami",
        }
    }
}

impl FromStr for RawTaste {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        RawTaste::ALL
            .into_iter()
            .find(|r| r.name() == t)
            .ok_or_else(|| Error::invalid(format!("unknown taste label {s:?}")))
    }
}

impl fmt::Display for RawTaste {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_components<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < T::zero() {
            return Err(Error::invalid(format!("{what} component {i} must be finite and non-negative, got {v}")));
        }
    }
    Ok(())
}

/// Intensities over (sweet, bitter, sour, salty, spicy). Components are
/// always finite and non-negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[T; 5]", into = "[T; 5]")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TasteVector<T: Scalar>([T; 5]);

impl<T: Scalar> TryFrom<[T; 5]> for TasteVector<T> {
    type Error = Error;

    fn try_from(values: [T; 5]) -> Result<Self> {
        Self::new(values)
    }
}

impl<T: Scalar> From<TasteVector<T>> for [T; 5] {
    fn from(v: TasteVector<T>) -> Self {
        v.0
    }
}

impl<T: Scalar> TasteVector<T> {
    pub fn new(values: [T; 5]) -> Result<Self> {
        check_components(&values, "taste vector")?;
        Ok(Self(values))
    }

    pub fn zero() -> Self {
        Self([T::zero(); 5])
    }

    pub fn components(&self) -> &[T; 5] {
        &self.0
    }

    pub fn get(&self, taste: Taste) -> T {
        self.0[taste.index()]
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == T::zero())
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.0.map(|v| v * factor))
    }
}

/// Intensities over (sweet, bitter, sour, salty, spicy, umami).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RawTasteVector<T: Scalar>([T; 6]);

impl<T: Scalar> RawTasteVector<T> {
    pub fn new(values: [T; 6]) -> Result<Self> {
        check_components(&values, "raw taste vector")?;
        Ok(Self(values))
    }

    pub fn zero() -> Self {
        Self([T::zero(); 6])
    }

    pub fn components(&self) -> &[T; 6] {
        &self.0
    }

    pub fn get(&self, taste: RawTaste) -> T {
        self.0[taste.index()]
    }
}

/// Folds umami into salty; the other four tastes are copied.
pub fn merge_umami<T: Scalar>(v: &RawTasteVector<T>) -> TasteVector<T> {
    let r = v.0;
    TasteVector([r[0], r[1], r[2], r[3] + r[5], r[4]])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationScheme {
    /// Components sum to one.
    #[default]
    L1,
    /// Unit Euclidean norm.
    L2,
    /// Largest component equals one.
    Max,
}

impl FromStr for NormalizationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            "max" => Ok(Self::Max),
            other => Err(Error::invalid(format!("unknown normalization scheme {other:?}"))),
        }
    }
}

impl fmt::Display for NormalizationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L1 => "l1",
            Self::L2 => "l2",
            Self::Max => "max",
        })
    }
}

impl NormalizationScheme {
    pub fn norm<T: Scalar>(self, v: &TasteVector<T>) -> T {
        match self {
            Self::L1 => v.sum(),
            Self::L2 => v.0.iter().map(|x| *x * *x).sum::<T>().sqrt(),
            Self::Max => v.0.iter().copied().fold(T::zero(), T::max),
        }
    }

    /// Largest possible Euclidean distance between two non-negative vectors
    /// normalized under this scheme.
    pub fn diameter<T: Scalar>(self) -> T {
        match self {
            Self::L1 | Self::L2 => T::lit(2.0).sqrt(),
            Self::Max => T::lit(5.0).sqrt(),
        }
    }
}

/// Output of [`normalize`]. `degenerate` is set when the input was the zero
/// vector, which is returned unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalized<T: Scalar> {
    pub vector: TasteVector<T>,
    pub degenerate: bool,
}

pub fn normalize<T: Scalar>(v: &TasteVector<T>, scheme: NormalizationScheme) -> Normalized<T> {
    let norm = scheme.norm(v);
    if norm == T::zero() {
        return Normalized { vector: *v, degenerate: true };
    }
    Normalized { vector: TasteVector(v.0.map(|x| x / norm)), degenerate: false }
}

/// Component-wise mean of the ingredient vectors, renormalized.
pub fn blend_dish<T: Scalar>(ingredients: &[TasteVector<T>], scheme: NormalizationScheme) -> Result<TasteVector<T>> {
    if ingredients.is_empty() {
        return Err(Error::invalid("a dish needs at least one ingredient"));
    }
    let n = T::count(ingredients.len());
    let mut mean = [T::zero(); 5];
    for v in ingredients {
        for (m, x) in mean.iter_mut().zip(v.0) {
            *m = *m + x;
        }
    }
    let mean = TasteVector(mean.map(|m| m / n));
    Ok(normalize(&mean, scheme).vector)
}
