//! STFT-family audio descriptors aggregated to per-segment mean/std vectors.
//!
//! All per-frame series produced for one `(segment, config)` pair share the
//! same frame count: frames start at multiples of the hop and no padding is
//! applied, so a signal of `N` samples yields `1 + (N - frame) / hop` frames.

mod chroma;
mod extract;
mod frame;
mod mel;
mod spectral;
mod stft;
mod wav;

use rustfft::FftNum;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub use chroma::{chroma_stft, chroma_summary, tonnetz, DEFAULT_N_CHROMA};
pub use extract::{
    extract_features, frame_features, FeatureFamily, FeatureKey, FeatureManifest, FeatureVector, FrameFeatures,
};
pub use frame::{rms_energy, zero_crossing_rate};
pub use mel::{dct_ortho, hz_to_mel, mel_filterbank, mel_to_hz, mfcc, DEFAULT_N_MELS, DEFAULT_N_MFCC};
pub use spectral::{spectral_bandwidth, spectral_centroid, spectral_contrast, spectral_rolloff, DEFAULT_ROLLOFF};
pub use stft::{stft, Spectrogram};
pub use wav::{read_wav, write_wav_f32, write_wav_i16};

/// Magnitude/power floor applied before every logarithm.
pub const MAGNITUDE_FLOOR: f64 = 1e-10;

/// Scalar usable by the FFT.
pub trait AudioScalar: Scalar + FftNum {}

impl AudioScalar for f32 {}
impl AudioScalar for f64 {}

#[derive(Clone, Debug, PartialEq)]
pub struct AudioSegment<T: Scalar> {
    samples: Vec<T>,
    sample_rate_hz: u32,
}

impl<T: Scalar> AudioSegment<T> {
    /// Samples must be finite and within [-1, 1].
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("audio segment is empty"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > T::one()) {
            return Err(Error::invalid(format!("sample {i} is {} (must be finite and within [-1, 1])", samples[i])));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    /// Linear-interpolation resampling.
    pub fn resample_linear(&self, target_hz: u32) -> Result<Self> {
        if target_hz == 0 {
            return Err(Error::invalid("target sample rate must be positive"));
        }
        if target_hz == self.sample_rate_hz {
            return Ok(self.clone());
        }
        let ratio = f64::from(self.sample_rate_hz) / f64::from(target_hz);
        let out_len = ((self.samples.len() as f64) / ratio).floor().max(1.0) as usize;
        let last = self.samples.len() - 1;
        let samples = (0..out_len)
            .map(|i| {
                let pos = i as f64 * ratio;
                let lo = (pos.floor() as usize).min(last);
                let hi = (lo + 1).min(last);
                let frac = T::lit(pos - lo as f64);
                self.samples[lo] + (self.samples[hi] - self.samples[lo]) * frac
            })
            .collect();
        Self::new(samples, target_hz)
    }

    /// Consecutive non-overlapping pieces of `seconds` each; a trailing piece
    /// is kept only if it holds at least `min_len` samples.
    pub fn split(&self, seconds: f64, min_len: usize) -> Vec<Self> {
        let chunk = ((seconds * f64::from(self.sample_rate_hz)).round() as usize).max(1);
        self.samples
            .chunks(chunk)
            .filter(|c| c.len() >= min_len.max(1))
            .map(|c| Self { samples: c.to_vec(), sample_rate_hz: self.sample_rate_hz })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn coefficients<T: Scalar>(self, n: usize) -> Vec<T> {
        match self {
            Window::Rectangular => vec![T::one(); n],
            Window::Hann => (0..n)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    T::lit(0.5 - 0.5 * phase.cos())
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub frame_length: usize,
    pub hop_length: usize,
    pub window: Window,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { frame_length: 2048, hop_length: 512, window: Window::Hann }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_length < 2 || !self.frame_length.is_multiple_of(2) {
            return Err(Error::invalid("frame length must be an even number >= 2"));
        }
        if self.hop_length == 0 || self.hop_length > self.frame_length {
            return Err(Error::invalid("hop length must satisfy 0 < hop <= frame"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.frame_length / 2 + 1
    }

    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_length {
            0
        } else {
            1 + (n_samples - self.frame_length) / self.hop_length
        }
    }

    pub(crate) fn check_segment<T: Scalar>(&self, seg: &AudioSegment<T>) -> Result<usize> {
        self.validate()?;
        let frames = self.n_frames(seg.len());
        if frames == 0 {
            return Err(Error::invalid(format!(
                "segment of {} samples is shorter than one {}-sample frame",
                seg.len(),
                self.frame_length
            )));
        }
        Ok(frames)
    }
}
