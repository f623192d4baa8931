use super::{Spectrogram, MAGNITUDE_FLOOR};
use crate::Scalar;

pub const DEFAULT_ROLLOFF: f64 = 0.85;

/// Magnitude-weighted mean frequency per frame (Hz). Silent frames give 0.
pub fn spectral_centroid<T: Scalar>(spec: &Spectrogram<T>) -> Vec<T> {
    let freqs = spec.bin_frequencies();
    spec.magnitudes()
        .iter()
        .map(|mags| {
            let total: T = mags.iter().copied().sum();
            if total <= T::zero() {
                return T::zero();
            }
            mags.iter().zip(&freqs).map(|(m, f)| *m * *f).sum::<T>() / total
        })
        .collect()
}

/// Magnitude-weighted standard deviation of frequency around the centroid
/// (Hz).
pub fn spectral_bandwidth<T: Scalar>(spec: &Spectrogram<T>) -> Vec<T> {
    let freqs = spec.bin_frequencies();
    let centroids = spectral_centroid(spec);
    spec.magnitudes()
        .iter()
        .zip(centroids)
        .map(|(mags, c)| {
            let total: T = mags.iter().copied().sum();
            if total <= T::zero() {
                return T::zero();
            }
            let var = mags.iter().zip(&freqs).map(|(m, f)| *m * (*f - c) * (*f - c)).sum::<T>() / total;
            var.sqrt()
        })
        .collect()
}

/// Lowest bin frequency at which the cumulative magnitude reaches `fraction`
/// of the frame total (Hz). Silent frames give 0.
pub fn spectral_rolloff<T: Scalar>(spec: &Spectrogram<T>, fraction: T) -> Vec<T> {
    spec.magnitudes()
        .iter()
        .map(|mags| {
            let total: T = mags.iter().copied().sum();
            if total <= T::zero() {
                return T::zero();
            }
            let threshold = fraction * total;
            let mut acc = T::zero();
            for (k, m) in mags.iter().enumerate() {
                acc = acc + *m;
                if acc >= threshold {
                    return spec.bin_frequency(k);
                }
            }
            spec.nyquist()
        })
        .collect()
}

/// Octave band edges: `[0, f0)`, then doublings of `f0`, with the last band
/// running to Nyquist.
fn contrast_bands<T: Scalar>(spec: &Spectrogram<T>, n_bands: usize) -> Vec<(usize, usize)> {
    let fmin = 200.0;
    let nyq = spec.nyquist().as_f64();
    let mut edges = vec![0.0];
    for b in 0..n_bands.saturating_sub(1) {
        edges.push(fmin * 2f64.powi(b as i32));
    }
    edges.push(f64::INFINITY);
    let freqs: Vec<f64> = spec.bin_frequencies().iter().map(|f| f.as_f64()).collect();
    edges
        .windows(2)
        .enumerate()
        .map(|(b, w)| {
            let last = b + 1 == n_bands;
            let lo = freqs.iter().position(|f| *f >= w[0]).unwrap_or(freqs.len());
            let hi = if last {
                freqs.len()
            } else {
                freqs.iter().position(|f| *f >= w[1].min(nyq + 1.0)).unwrap_or(freqs.len())
            };
            (lo, hi.max(lo))
        })
        .collect()
}

/// Per-frame peak-to-valley contrast (dB) in `n_bands` octave sub-bands. In
/// each band, the mean of the top and bottom 2% of bin magnitudes (at least
/// one bin) are compared as `20 log10(peak / valley)` after flooring both.
/// Empty bands report 0.
pub fn spectral_contrast<T: Scalar>(spec: &Spectrogram<T>, n_bands: usize) -> Vec<Vec<T>> {
    let bands = contrast_bands(spec, n_bands);
    let floor = T::lit(MAGNITUDE_FLOOR);
    let twenty = T::lit(20.0);
    spec.magnitudes()
        .iter()
        .map(|mags| {
            bands
                .iter()
                .map(|&(lo, hi)| {
                    if hi <= lo {
                        return T::zero();
                    }
                    let mut band: Vec<T> = mags[lo..hi].to_vec();
                    band.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                    let q = ((0.02 * band.len() as f64).round() as usize).max(1);
                    let valley = band[..q].iter().copied().sum::<T>() / T::count(q);
                    let peak = band[band.len() - q..].iter().copied().sum::<T>() / T::count(q);
                    twenty * (peak.max(floor) / valley.max(floor)).log10()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{stft, AudioSegment, StftConfig};
    use num_complex::Complex;

    fn tone(freq: f64, sr: u32) -> Spectrogram<f64> {
        let x = (0..8192).map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(sr)).sin()).collect();
        stft(&AudioSegment::new(x, sr).unwrap(), &StftConfig::default()).unwrap()
    }

    fn flat(sr: u32) -> Spectrogram<f64> {
        let frame = vec![Complex::new(1.0, 0.0); 1025];
        Spectrogram::from_frames(vec![frame; 3], sr, 2048)
    }

    #[test]
    fn pure_tone_centroid_and_bandwidth() {
        let spec = tone(1000.0, 22050);
        let bw = spec.bin_width();
        for c in spectral_centroid(&spec) {
            assert!((c - 1000.0).abs() < bw, "centroid {c}");
        }
        let centred = tone(93.0 * bw, 22050);
        for b in spectral_bandwidth(&centred) {
            assert!(b <= 2.0 * bw, "bandwidth {b}");
        }
    }

    #[test]
    fn flat_spectrum_rolloff_and_contrast() {
        let spec = flat(22050);
        for r in spectral_rolloff(&spec, 0.85) {
            assert!((r / 11025.0 - 0.85).abs() < 0.05 * 0.85);
        }
        for frame in spectral_contrast(&spec, 7) {
            assert_eq!(frame.len(), 7);
            assert!(frame.iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn silent_spectrum_uses_the_floor() {
        let spec = Spectrogram::from_frames(vec![vec![Complex::new(0.0, 0.0); 1025]], 22050, 2048);
        assert_eq!(spectral_contrast(&spec, 7)[0], vec![0.0; 7]);
        assert_eq!(spectral_centroid(&spec), vec![0.0]);
        assert_eq!(spectral_rolloff(&spec, 0.85), vec![0.0]);
    }

    #[test]
    fn tone_raises_contrast_in_its_band_only() {
        // bin-centred 1 kHz-ish tone falls in the 800-1600 Hz band (index 3)
        let spec = tone(93.0 * 22050.0 / 2048.0, 22050);
        for frame in spectral_contrast(&spec, 7) {
            assert!(frame[3] > 60.0, "{frame:?}");
            for (b, c) in frame.iter().enumerate() {
                if b != 3 {
                    assert!(*c < 1.0, "band {b}: {c}");
                }
            }
        }
    }
}
