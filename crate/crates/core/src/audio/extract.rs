use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::chroma::{chroma_stft, chroma_summary, tonnetz, DEFAULT_N_CHROMA};
use super::frame::{rms_energy, zero_crossing_rate};
use super::mel::{mfcc, DEFAULT_N_MELS, DEFAULT_N_MFCC};
use super::spectral::{spectral_bandwidth, spectral_centroid, spectral_contrast, spectral_rolloff, DEFAULT_ROLLOFF};
use super::stft::stft;
use super::{AudioScalar, AudioSegment, StftConfig};
use crate::{Error, Result, Scalar};

const N_CONTRAST: usize = 7;
const N_TONNETZ: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    Zcr,
    ChromaStft,
    Tonnetz,
    Mfcc,
    Rms,
    SpectralCentroid,
    SpectralBandwidth,
    SpectralContrast,
    SpectralRolloff,
    ChromaEnergy,
    ChromaPeak,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 11] = [
        FeatureFamily::Zcr,
        FeatureFamily::ChromaStft,
        FeatureFamily::Tonnetz,
        FeatureFamily::Mfcc,
        FeatureFamily::Rms,
        FeatureFamily::SpectralCentroid,
        FeatureFamily::SpectralBandwidth,
        FeatureFamily::SpectralContrast,
        FeatureFamily::SpectralRolloff,
        FeatureFamily::ChromaEnergy,
        FeatureFamily::ChromaPeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureFamily::Zcr => "zcr",
            FeatureFamily::ChromaStft => "chroma_stft",
            FeatureFamily::Tonnetz => "tonnetz",
            FeatureFamily::Mfcc => "mfcc",
            FeatureFamily::Rms => "rms",
            FeatureFamily::SpectralCentroid => "spectral_centroid",
            FeatureFamily::SpectralBandwidth => "spectral_bandwidth",
            FeatureFamily::SpectralContrast => "spectral_contrast",
            FeatureFamily::SpectralRolloff => "spectral_rolloff",
            FeatureFamily::ChromaEnergy => "chroma_energy",
            FeatureFamily::ChromaPeak => "chroma_peak",
        }
    }

    /// Per-frame dimensionality in the canonical layout.
    pub fn width(self) -> usize {
        match self {
            FeatureFamily::ChromaStft => DEFAULT_N_CHROMA,
            FeatureFamily::Tonnetz => N_TONNETZ,
            FeatureFamily::Mfcc => DEFAULT_N_MFCC,
            FeatureFamily::SpectralContrast => N_CONTRAST,
            _ => 1,
        }
    }
}

/// One base (per-frame) feature: a family and a coefficient index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FeatureKey {
    pub family: FeatureFamily,
    pub index: usize,
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family.width() == 1 {
            f.write_str(self.family.name())
        } else {
            write!(f, "{}_{}", self.family.name(), self.index)
        }
    }
}

impl FromStr for FeatureKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        for family in FeatureFamily::ALL {
            if family.width() == 1 {
                if s == family.name() {
                    return Ok(FeatureKey { family, index: 0 });
                }
            } else if let Some(rest) = s.strip_prefix(family.name()).and_then(|r| r.strip_prefix('_')) {
                if let Ok(index) = rest.parse::<usize>() {
                    if index < family.width() {
                        return Ok(FeatureKey { family, index });
                    }
                }
            }
        }
        Err(Error::invalid(format!("unknown base feature {s:?}")))
    }
}

/// Ordered list of base features to aggregate. Every base feature becomes a
/// `_mean` and a `_std` column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureManifest {
    keys: Vec<FeatureKey>,
}

impl FeatureManifest {
    pub fn new(keys: Vec<FeatureKey>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for k in &keys {
            if k.index >= k.family.width() {
                return Err(Error::invalid(format!("{k} is out of range for its family")));
            }
            if !seen.insert(*k) {
                return Err(Error::invalid(format!("feature {k} listed twice")));
            }
        }
        if keys.is_empty() {
            return Err(Error::invalid("feature manifest is empty"));
        }
        Ok(Self { keys })
    }

    /// The 46-feature layout: ZCR, 6 STFT chroma bins, 6 tonnetz dims,
    /// 20 MFCCs, RMS, centroid, bandwidth, 7 contrast bands, rolloff, chroma
    /// energy and chroma peak share.
    pub fn canonical() -> Self {
        let keys = FeatureFamily::ALL
            .iter()
            .flat_map(|&family| (0..family.width()).map(move |index| FeatureKey { family, index }))
            .collect();
        Self { keys }
    }

    pub fn parse(names: &[impl AsRef<str>]) -> Result<Self> {
        Self::new(names.iter().map(|n| n.as_ref().parse()).collect::<Result<_>>()?)
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Output column names, `<base>_mean` then `<base>_std` per base feature.
    pub fn column_names(&self) -> Vec<String> {
        self.keys.iter().flat_map(|k| [format!("{k}_mean"), format!("{k}_std")]).collect()
    }
}

/// Every per-frame series for one segment, family by family
/// (`frames x width`).
#[derive(Clone, Debug, PartialEq)]
pub struct FrameFeatures<T: Scalar> {
    pub n_frames: usize,
    series: Vec<(FeatureFamily, Vec<Vec<T>>)>,
}

impl<T: Scalar> FrameFeatures<T> {
    pub fn family(&self, family: FeatureFamily) -> &[Vec<T>] {
        &self.series.iter().find(|(f, _)| *f == family).expect("every family is computed").1
    }

    /// The per-frame values of one base feature.
    pub fn series(&self, key: FeatureKey) -> Vec<T> {
        self.family(key.family).iter().map(|frame| frame[key.index]).collect()
    }
}

fn column<T: Scalar>(v: Vec<T>) -> Vec<Vec<T>> {
    v.into_iter().map(|x| vec![x]).collect()
}

/// Computes all feature families for one segment.
pub fn frame_features<T: AudioScalar>(seg: &AudioSegment<T>, cfg: &StftConfig) -> Result<FrameFeatures<T>> {
    let spec = stft(seg, cfg)?;
    let chroma = chroma_stft(&spec, DEFAULT_N_CHROMA);
    let summary = chroma_summary(&spec, DEFAULT_N_CHROMA);
    let series = vec![
        (FeatureFamily::Zcr, column(zero_crossing_rate(seg, cfg)?)),
        (FeatureFamily::Tonnetz, tonnetz(&chroma)),
        (FeatureFamily::ChromaStft, chroma),
        (FeatureFamily::Mfcc, mfcc(&spec, DEFAULT_N_MELS, DEFAULT_N_MFCC)),
        (FeatureFamily::Rms, column(rms_energy(seg, cfg)?)),
        (FeatureFamily::SpectralCentroid, column(spectral_centroid(&spec))),
        (FeatureFamily::SpectralBandwidth, column(spectral_bandwidth(&spec))),
        (FeatureFamily::SpectralContrast, spectral_contrast(&spec, N_CONTRAST)),
        (FeatureFamily::SpectralRolloff, column(spectral_rolloff(&spec, T::lit(DEFAULT_ROLLOFF)))),
        (FeatureFamily::ChromaEnergy, summary.iter().map(|s| vec![s[0]]).collect()),
        (FeatureFamily::ChromaPeak, summary.iter().map(|s| vec![s[1]]).collect()),
    ];
    let n_frames = spec.n_frames();
    debug_assert!(series.iter().all(|(_, s)| s.len() == n_frames));
    Ok(FrameFeatures { n_frames, series })
}

/// Mean and standard deviation aggregate of one segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureVector<T: Scalar> {
    pub names: Vec<String>,
    pub values: Vec<T>,
}

/// Reduces each manifest feature's per-frame series to (mean, population
/// std), in manifest order.
pub fn extract_features<T: AudioScalar>(
    seg: &AudioSegment<T>,
    cfg: &StftConfig,
    manifest: &FeatureManifest,
) -> Result<FeatureVector<T>> {
    let frames = frame_features(seg, cfg)?;
    let mut values = Vec::with_capacity(2 * manifest.len());
    for key in manifest.keys() {
        let series = frames.series(*key);
        if series.iter().any(|v| !v.is_finite()) {
            return Err(Error::degenerate(format!("non-finite value in the {} series", key.family.name())));
        }
        values.push(crate::stats::mean(&series));
        values.push(crate::stats::population_sd(&series));
    }
    Ok(FeatureVector { names: manifest.column_names(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_manifest_has_46_unique_features() {
        let m = FeatureManifest::canonical();
        assert_eq!(m.len(), 46);
        let names = m.column_names();
        assert_eq!(names.len(), 92);
        assert_eq!(names[0], "zcr_mean");
        assert_eq!(names[1], "zcr_std");
        let unique: BTreeSet<_> = names.iter().collect();
        assert_eq!(unique.len(), 92);
    }

    #[test]
    fn keys_parse_round_trip() {
        for k in FeatureManifest::canonical().keys() {
            assert_eq!(k.to_string().parse::<FeatureKey>().unwrap(), *k);
        }
        assert!("mfcc_20".parse::<FeatureKey>().is_err());
        assert!("loudness".parse::<FeatureKey>().is_err());
        assert!(FeatureManifest::parse(&["zcr", "zcr"]).is_err());
    }
}
