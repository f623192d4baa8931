use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    filter_ratings, mantel, mean_percepts, normalize_ratings, pairwise_distances, permutation_alignment, procrustes,
    zscore_columns, ImpairmentFilter, MantelMethod, RatingRecord,
};
use crate::rng::derive_seed;
use crate::taste::{Taste, TasteVector};
use crate::{Error, LinalgScalar, Result};

/// A rated track together with the taste target it was matched to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stimulus<T: LinalgScalar> {
    pub target_id: String,
    pub track_id: String,
    pub target: TasteVector<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentConfig {
    pub n_perm_alignment: usize,
    pub n_perm_mantel: usize,
    pub n_perm_procrustes: usize,
    pub mantel_method: MantelMethod,
    pub impairments: ImpairmentFilter,
    /// z-score target columns so targets and percepts share a scale
    pub standardize_targets: bool,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            n_perm_alignment: 10_000,
            n_perm_mantel: 9_999,
            n_perm_procrustes: 9_999,
            mantel_method: MantelMethod::Pearson,
            impairments: ImpairmentFilter::default(),
            standardize_targets: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledMatrix<T: LinalgScalar> {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<T>>,
}

impl<T: LinalgScalar> LabeledMatrix<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Distance from each percept (rows) to each target (columns).
pub fn distance_matrix<T: LinalgScalar>(
    percepts: &DMatrix<T>,
    targets: &DMatrix<T>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
) -> LabeledMatrix<T> {
    let values = (0..percepts.nrows())
        .map(|i| (0..targets.nrows()).map(|j| super::mantel::row_distance(percepts, i, targets, j)).collect())
        .collect();
    LabeledMatrix { row_labels, col_labels, values }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentReport<T: LinalgScalar> {
    pub n_stimuli: usize,
    pub n_ratings: usize,
    pub n_subjects: usize,
    pub observed_mean_distance: T,
    pub permuted_mean: T,
    pub permuted_sd: T,
    pub z: T,
    pub p_perm: T,
    pub mantel_r: T,
    pub mantel_p: T,
    pub mantel_method: MantelMethod,
    pub procrustes_m2: T,
    pub protest_p: T,
    pub distance_matrix: LabeledMatrix<T>,
    pub warnings: Vec<String>,
}

impl<T: LinalgScalar> AlignmentReport<T> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stimuli: {}  ratings: {}  subjects: {}", self.n_stimuli, self.n_ratings, self.n_subjects);
        let _ = writeln!(
            s,
            "matched distance: observed {:.4}  permuted {:.4} +/- {:.4}  z = {:.3}  p = {:.4}",
            self.observed_mean_distance, self.permuted_mean, self.permuted_sd, self.z, self.p_perm
        );
        let _ = writeln!(s, "mantel ({}): r = {:.4}  p = {:.4}", self.mantel_method, self.mantel_r, self.mantel_p);
        let _ = writeln!(s, "procrustes: m2 = {:.4}  protest p = {:.4}", self.procrustes_m2, self.protest_p);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// Runs all three alignment tests for one experiment. Percept rows follow
/// the order of `stimuli`; each stimulus track needs at least one rating
/// after impairment filtering.
pub fn alignment_report<T: LinalgScalar>(
    stimuli: &[Stimulus<T>],
    ratings: &[RatingRecord],
    cfg: &AlignmentConfig,
    seed: u64,
) -> Result<AlignmentReport<T>> {
    let mut seen = BTreeSet::new();
    for s in stimuli {
        if !seen.insert(s.track_id.as_str()) {
            return Err(Error::invalid(format!("track {} appears in more than one stimulus", s.track_id)));
        }
    }
    let stimulus_tracks: BTreeSet<&str> = seen;
    let kept: Vec<RatingRecord> = filter_ratings(ratings, cfg.impairments)
        .into_iter()
        .filter(|r| stimulus_tracks.contains(r.track_id.as_str()))
        .collect();
    let mut warnings = Vec::new();
    let dropped = ratings.len() - kept.len();
    if dropped > 0 {
        warnings.push(format!("{dropped} ratings excluded by impairment filter or unknown track"));
    }
    let normalized = normalize_ratings::<T>(&kept)?;
    warnings.extend(normalized.warnings.iter().cloned());
    let track_order: Vec<String> = stimuli.iter().map(|s| s.track_id.clone()).collect();
    let percepts = mean_percepts(&normalized, &track_order)?.values;

    let mut targets = DMatrix::from_fn(stimuli.len(), 5, |i, c| stimuli[i].target.get(Taste::ALL[c]));
    if cfg.standardize_targets {
        for c in zscore_columns(&mut targets) {
            warnings.push(format!("target column {} is constant; set to zero", Taste::ALL[c]));
        }
    }

    let perm = permutation_alignment(&targets, &percepts, cfg.n_perm_alignment, derive_seed(seed, "alignment"))?;
    warnings.extend(perm.warnings.iter().cloned());
    let m = mantel(
        &pairwise_distances(&targets),
        &pairwise_distances(&percepts),
        cfg.n_perm_mantel,
        derive_seed(seed, "mantel"),
        cfg.mantel_method,
    )?;
    let pr = procrustes(&targets, &percepts, cfg.n_perm_procrustes, derive_seed(seed, "protest"))?;
    let subjects: BTreeSet<&str> = kept.iter().map(|r| r.subject_id.as_str()).collect();
    let labels: Vec<String> = stimuli.iter().map(|s| s.target_id.clone()).collect();

    Ok(AlignmentReport {
        n_stimuli: stimuli.len(),
        n_ratings: kept.len(),
        n_subjects: subjects.len(),
        observed_mean_distance: perm.observed,
        permuted_mean: perm.permuted_mean,
        permuted_sd: perm.permuted_sd,
        z: perm.z,
        p_perm: perm.p,
        mantel_r: m.r,
        mantel_p: m.p,
        mantel_method: m.method,
        procrustes_m2: pr.m2,
        protest_p: pr.p,
        distance_matrix: distance_matrix(&percepts, &targets, track_order, labels),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stimuli() -> Vec<Stimulus<f64>> {
        let targets = [
            [0.7, 0.1, 0.1, 0.05, 0.05],
            [0.1, 0.6, 0.1, 0.1, 0.1],
            [0.1, 0.1, 0.6, 0.1, 0.1],
            [0.1, 0.1, 0.1, 0.6, 0.1],
            [0.05, 0.05, 0.1, 0.1, 0.7],
            [0.3, 0.3, 0.2, 0.1, 0.1],
        ];
        targets
            .iter()
            .enumerate()
            .map(|(i, t)| Stimulus {
                target_id: format!("dish{i}"),
                track_id: format!("track{i}"),
                target: TasteVector::new(*t).unwrap(),
            })
            .collect()
    }

    fn ratings(stim: &[Stimulus<f64>], subjects: usize) -> Vec<RatingRecord> {
        let mut out = Vec::new();
        for s in 0..subjects {
            for st in stim {
                let r = st.target.components().map(|v| (1.0 + 6.0 * v).round().clamp(1.0, 7.0) as u8);
                let mut r = r;
                r[s % 5] = r[s % 5].saturating_add((s % 2) as u8).min(7);
                out.push(RatingRecord {
                    subject_id: format!("s{s}"),
                    track_id: st.track_id.clone(),
                    ratings: r,
                    device: "headphones".into(),
                    hearing_impairment: s == 0,
                    taste_smell_impairment: false,
                });
            }
        }
        out
    }

    #[test]
    fn faithful_ratings_align() {
        let stim = stimuli();
        let cfg =
            AlignmentConfig { n_perm_alignment: 999, n_perm_mantel: 999, n_perm_procrustes: 999, ..Default::default() };
        let rep = alignment_report(&stim, &ratings(&stim, 6), &cfg, 11).unwrap();
        assert_eq!(rep.n_subjects, 6);
        assert!(rep.z > 1.0, "{}", rep.to_text());
        assert!(rep.p_perm < 0.05);
        assert!(rep.mantel_r > 0.5);
        assert!(rep.procrustes_m2 < 0.5);
        assert_eq!(rep.distance_matrix.values.len(), 6);
        assert_eq!(rep.distance_matrix.to_csv().lines().count(), 7);
        let again = alignment_report(&stim, &ratings(&stim, 6), &cfg, 11).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn impairment_filter_drops_subjects() {
        let stim = stimuli();
        let cfg = AlignmentConfig {
            n_perm_alignment: 99,
            n_perm_mantel: 99,
            n_perm_procrustes: 99,
            impairments: ImpairmentFilter { exclude_hearing: true, exclude_taste_smell: false },
            ..Default::default()
        };
        let rep = alignment_report(&stim, &ratings(&stim, 4), &cfg, 1).unwrap();
        assert_eq!(rep.n_subjects, 3);
    }

    #[test]
    fn unrated_stimulus_is_rejected() {
        let stim = stimuli();
        let mut r = ratings(&stim, 2);
        r.retain(|x| x.track_id != "track3");
        assert!(alignment_report(&stim, &r, &AlignmentConfig::default(), 0).is_err());
    }
}
