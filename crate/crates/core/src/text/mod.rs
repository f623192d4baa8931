//! Metadata probes: genre and mood effects on flavor annotations, and
//! clustering of free-text captions.
//!
//! The rank tests and effect sizes are generic over [`Scalar`](crate::Scalar).
//! The caption pipeline (tokenizer, TF-IDF, k-means, silhouette) works on
//! sparse `f64` rows.

mod effects;
mod kmeans;
mod linkage;
mod nonparam;
mod tfidf;

pub use effects::{
    genre_flavor_matrix, genre_tests, mood_effects, GenreFlavorMatrix, GenreTest, GenreTestReport, MoodEffect,
    MoodEffectReport,
};
pub use kmeans::{
    cluster_texts, kmeans, silhouette, silhouette_sampled, top_terms, KMeansConfig, KMeansResult, TextClusterConfig,
    TextClusterReport,
};
pub use linkage::{average_linkage, Dendrogram, Merge};
pub use nonparam::{cohens_d, dunn_posthoc, kruskal_wallis, Adjustment, DunnPair, KruskalWallis};
pub use tfidf::{tfidf, tokenize, SparseRow, TfidfConfig, TfidfMatrix};
