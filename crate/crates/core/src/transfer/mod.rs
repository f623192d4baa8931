//! Cross-corpus transfer diagnostics: do feature/flavor correlation
//! profiles, forest importance rankings and latent structure measured on one
//! corpus carry over to another?

mod cca;
mod factor;
mod forest;
mod profile;
mod report;

pub use crate::stats::{spearman, spearman_exact_p, Correlation};
pub use cca::{cca_first, CcaResult, CCA_RIDGE};
pub use factor::{correlation_eigenvalues, parallel_analysis, ParallelAnalysis};
pub use forest::{rf_importance, ForestConfig, ImportanceKind, RegressionTree};
pub use profile::{
    correlation_profile, correlation_transfer, importance_transfer, sign_agreement, CorrelationProfile, SignAgreement,
};
pub use report::{transfer_report, FlavorTransfer, TransferConfig, TransferReport};
