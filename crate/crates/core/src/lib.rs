//! Cross-modal taste/music analysis toolkit.
//!
//! The crate covers the whole quantitative chain between food chemistry and
//! music: five-dimensional taste vectors built from compound and nutrient
//! tables, STFT-family audio descriptors, nearest-neighbour matching of taste
//! targets against annotated corpora, and the statistics used to check
//! whether audio/flavor structure survives a change of supervision regime
//! (correlation and importance transfer, parallel analysis, CCA) and whether
//! computed targets line up with listener ratings (permutation, Mantel and
//! Procrustes tests).
//!
//! Numerical code is generic over a [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases at the bottom of this file are the instantiations the command-line
//! tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod corpus;
pub mod error;
pub mod matching;
pub mod perceptual;
pub mod rng;
pub mod stats;
pub mod taste;
pub mod text;
pub mod transfer;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Real scalar usable throughout the crate.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + nalgebra::Scalar + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion back to `f64`, used when handing values to
    /// distribution functions.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Scalar that also supports nalgebra's decompositions (SVD, symmetric
/// eigen-decomposition).
pub trait LinalgScalar: Scalar + nalgebra::RealField {}

impl LinalgScalar for f32 {}
impl LinalgScalar for f64 {}

pub type TasteVector64 = taste::TasteVector<f64>;
pub type RawTasteVector64 = taste::RawTasteVector<f64>;
pub type CompoundRecord64 = taste::CompoundRecord<f64>;
pub type NutrientRecord64 = taste::NutrientRecord<f64>;
pub type WeightConfig64 = taste::WeightConfig<f64>;
pub type FoodProfile64 = taste::FoodProfile<f64>;
pub type SweepResult64 = taste::SweepResult<f64>;
pub type AudioSegment64 = audio::AudioSegment<f64>;
pub type FeatureVector64 = audio::FeatureVector<f64>;
pub type CorpusTable64 = corpus::CorpusTable<f64>;
pub type MatchResult64 = matching::MatchResult<f64>;
pub type TransferReport64 = transfer::TransferReport<f64>;
pub type AlignmentReport64 = perceptual::AlignmentReport<f64>;
