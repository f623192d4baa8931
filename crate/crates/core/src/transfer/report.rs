use std::fmt::Write;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::cca::{cca_first, CcaResult};
use super::factor::{parallel_analysis, ParallelAnalysis};
use super::forest::{rf_importance, ForestConfig};
use super::profile::{correlation_profile, correlation_transfer, importance_transfer, sign_agreement, SignAgreement};
use crate::corpus::CorpusTable;
use crate::rng::{derive_seed, stream};
use crate::stats::Correlation;
use crate::taste::Taste;
use crate::{Error, LinalgScalar, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferConfig {
    pub top_k: usize,
    pub forest: ForestConfig,
    pub pa_reps: usize,
    pub pa_percentile: f64,
    /// Row cap for parallel analysis; larger corpora are subsampled.
    pub pa_max_rows: Option<usize>,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self { top_k: 5, forest: ForestConfig::default(), pa_reps: 1000, pa_percentile: 95.0, pa_max_rows: Some(5000) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlavorTransfer<T: Scalar> {
    pub taste: Taste,
    pub correlation_transfer: Correlation<T>,
    pub importance_transfer: Correlation<T>,
    pub importance_anchor: Vec<T>,
    pub importance_other: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusLatent<T: Scalar> {
    pub label: String,
    pub rows: usize,
    pub cca: CcaResult<T>,
    /// Parallel analysis over the joint feature + flavor columns.
    pub parallel_analysis: ParallelAnalysis<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport<T: Scalar> {
    pub features: Vec<String>,
    pub flavors: Vec<FlavorTransfer<T>>,
    pub sign_agreement: SignAgreement,
    pub latent: Vec<CorpusLatent<T>>,
}

fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

impl<T: Scalar> TransferReport<T> {
    /// Plain-text table with one row per diagnostic and one column per
    /// flavor.
    pub fn to_table(&self) -> String {
        let order = [Taste::Sweet, Taste::Bitter, Taste::Salty, Taste::Sour, Taste::Spicy];
        let mut out = String::new();
        let _ = write!(out, "{:<34}", "");
        for t in order {
            let _ = write!(out, "{:>12}", capitalize(t.name()));
        }
        out.push('\n');
        type Pick<T> = fn(&FlavorTransfer<T>) -> Correlation<T>;
        let rows: [(&str, Pick<T>); 2] = [
            ("Correlation transfer (rho)", |f| f.correlation_transfer),
            ("Feature-importance transfer (rho)", |f| f.importance_transfer),
        ];
        for (label, pick) in rows {
            let _ = write!(out, "{label:<34}");
            for t in order {
                let c = pick(&self.flavors[t.index()]);
                let cell = format!("{:.3}{}", c.rho.as_f64(), stars(c.p.as_f64()));
                let _ = write!(out, "{cell:>12}");
            }
            out.push('\n');
        }
        out.push_str("*** p < 0.001; ** p < 0.01; * p < 0.05\n");
        let _ = writeln!(
            out,
            "Sign agreement (top {} per flavor): {}/{}",
            self.sign_agreement.selected.first().map_or(0, Vec::len),
            self.sign_agreement.agree,
            self.sign_agreement.total
        );
        for l in &self.latent {
            let _ = writeln!(
                out,
                "{}: first canonical correlation {:.3} (in-sample{}), parallel analysis retains {} factor(s)",
                l.label,
                l.cca.first_correlation.as_f64(),
                if l.cca.rank_deficient { ", rank-deficient block" } else { "" },
                l.parallel_analysis.retained
            );
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn latent<T: LinalgScalar>(
    corpus: &CorpusTable<T>,
    label: &str,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<CorpusLatent<T>> {
    let cca = cca_first(&corpus.features, &corpus.flavors)?;
    let n = corpus.len();
    let rows: Vec<usize> = match cfg.pa_max_rows {
        Some(m) if n > m => {
            let mut idx = sample(&mut stream(seed, &format!("pa-rows/{label}")), n, m).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n).collect(),
    };
    let p = corpus.features.ncols();
    let joint = DMatrix::from_fn(rows.len(), p + 5, |r, c| {
        if c < p {
            corpus.features[(rows[r], c)]
        } else {
            corpus.flavors[(rows[r], c - p)]
        }
    });
    let pa = parallel_analysis(&joint, cfg.pa_reps, cfg.pa_percentile, derive_seed(seed, &format!("pa/{label}")))?;
    Ok(CorpusLatent { label: label.to_string(), rows: n, cca, parallel_analysis: pa })
}

/// Full set of transfer diagnostics between an anchor corpus (whose
/// strongest associations define the sign-agreement selection) and a second
/// corpus, over the features both share.
pub fn transfer_report<T: LinalgScalar>(
    anchor: &CorpusTable<T>,
    other: &CorpusTable<T>,
    labels: (&str, &str),
    cfg: &TransferConfig,
    seed: u64,
) -> Result<TransferReport<T>> {
    let shared = anchor.shared_features(other);
    if shared.is_empty() {
        return Err(Error::invalid("the two corpora share no feature columns"));
    }
    let a = anchor.select_features(&shared)?;
    let b = other.select_features(&shared)?;

    let pa = correlation_profile(&a)?;
    let pb = correlation_profile(&b)?;
    let corr = correlation_transfer(&pa, &pb)?;
    let signs = sign_agreement(&pa, &pb, cfg.top_k)?;

    let mut flavors = Vec::with_capacity(5);
    for t in Taste::ALL {
        let ia = rf_importance(
            &a.features,
            &a.flavor_column(t),
            &cfg.forest,
            derive_seed(seed, &format!("rf/{}/{t}", labels.0)),
        )?;
        let ib = rf_importance(
            &b.features,
            &b.flavor_column(t),
            &cfg.forest,
            derive_seed(seed, &format!("rf/{}/{t}", labels.1)),
        )?;
        flavors.push(FlavorTransfer {
            taste: t,
            correlation_transfer: corr[t.index()],
            importance_transfer: importance_transfer(&ia, &ib)?,
            importance_anchor: ia,
            importance_other: ib,
        });
    }
    let latent = vec![latent(&a, labels.0, cfg, seed)?, latent(&b, labels.1, cfg, seed)?];
    Ok(TransferReport { features: shared, flavors, sign_agreement: signs, latent })
}
