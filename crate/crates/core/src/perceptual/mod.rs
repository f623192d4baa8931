//! Agreement between computed taste targets and listener ratings.
//!
//! Ratings are z-scored per taste and averaged per track into percept
//! vectors. Three complementary tests then compare the target and percept
//! configurations: a permutation test on the mean matched distance, a
//! Mantel test on the two inter-stimulus distance matrices and a
//! Procrustes/PROTEST analysis. All p-values use add-one smoothing,
//! `(1 + #extreme) / (n_perm + 1)`, and are never zero.

mod mantel;
mod permutation;
mod procrustes;
mod ratings;
mod report;

pub use mantel::{mantel, pairwise_distances, MantelMethod, MantelResult};
pub use permutation::{mean_matched_distance, permutation_alignment, PermutationAlignment};
pub use procrustes::{procrustes, procrustes_m2, ProcrustesResult};
pub use ratings::{
    filter_ratings, mean_percepts, normalize_ratings, zscore_columns, ImpairmentFilter, NormalizedRatings,
    PerceptMatrix, RatingRecord, LIKERT_MAX, LIKERT_MIN,
};
pub use report::{alignment_report, distance_matrix, AlignmentConfig, AlignmentReport, LabeledMatrix, Stimulus};

use crate::Scalar;

/// Slack used when comparing a permuted statistic against the observed one,
/// so that mathematically equal values computed in a different order count
/// as ties.
pub(crate) fn tie_tolerance<T: Scalar>(x: T) -> T {
    T::epsilon() * T::lit(1024.0) * x.abs().max(T::one())
}

pub(crate) fn add_one_p<T: Scalar>(extreme: usize, n_perm: usize) -> T {
    T::count(extreme + 1) / T::count(n_perm + 1)
}
