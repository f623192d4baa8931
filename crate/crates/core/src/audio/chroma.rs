use super::{Spectrogram, MAGNITUDE_FLOOR};
use crate::Scalar;

pub const DEFAULT_N_CHROMA: usize = 6;

/// C4, the centre of pitch class 0.
const C_REF_HZ: f64 = 261.625_565_300_598_6;
/// Bins below A0 carry no pitch information.
const MIN_PITCH_HZ: f64 = 27.5;

/// Pitch class of a frequency for `n_chroma` equal classes per octave.
pub(crate) fn pitch_class(freq_hz: f64, n_chroma: usize) -> Option<usize> {
    if freq_hz < MIN_PITCH_HZ {
        return None;
    }
    let pos = (n_chroma as f64 * (freq_hz / C_REF_HZ).log2()).round() as i64;
    Some(pos.rem_euclid(n_chroma as i64) as usize)
}

/// Power per pitch class before normalization.
fn raw_chroma<T: Scalar>(spec: &Spectrogram<T>, n_chroma: usize) -> Vec<Vec<T>> {
    let classes: Vec<Option<usize>> =
        (0..spec.n_bins()).map(|k| pitch_class(spec.bin_frequency(k).as_f64(), n_chroma)).collect();
    spec.power()
        .iter()
        .map(|power| {
            let mut bins = vec![T::zero(); n_chroma];
            for (p, c) in power.iter().zip(&classes) {
                if let Some(c) = c {
                    bins[*c] = bins[*c] + *p;
                }
            }
            bins
        })
        .collect()
}

/// STFT chroma: bin power folded onto `n_chroma` pitch classes, scaled so
/// the strongest class is 1. Frames without pitched energy are all zero.
pub fn chroma_stft<T: Scalar>(spec: &Spectrogram<T>, n_chroma: usize) -> Vec<Vec<T>> {
    let floor = T::lit(MAGNITUDE_FLOOR);
    raw_chroma(spec, n_chroma)
        .into_iter()
        .map(|bins| {
            let peak = bins.iter().copied().fold(T::zero(), T::max);
            if peak <= floor {
                vec![T::zero(); n_chroma]
            } else {
                bins.into_iter().map(|b| b / peak).collect()
            }
        })
        .collect()
}

/// Two per-frame chroma summaries: total pitched energy in dB (floored) and
/// the share of that energy held by the strongest class.
pub fn chroma_summary<T: Scalar>(spec: &Spectrogram<T>, n_chroma: usize) -> Vec<[T; 2]> {
    let floor = T::lit(MAGNITUDE_FLOOR);
    raw_chroma(spec, n_chroma)
        .into_iter()
        .map(|bins| {
            let total: T = bins.iter().copied().sum();
            let peak = bins.iter().copied().fold(T::zero(), T::max);
            let energy_db = T::lit(10.0) * total.max(floor).log10();
            let share = if total <= floor { T::zero() } else { peak / total };
            [energy_db, share]
        })
        .collect()
}

/// Tonal centroid: each frame's L1-normalized chroma projected onto
/// (sin, cos) pairs of the circle of fifths, the minor-third circle and the
/// major-third circle, with radii 1, 1 and 0.5.
pub fn tonnetz<T: Scalar>(chroma: &[Vec<T>]) -> Vec<Vec<T>> {
    use std::f64::consts::PI;
    let circles = [(7.0 * PI / 6.0, 1.0), (3.0 * PI / 2.0, 1.0), (2.0 * PI / 3.0, 0.5)];
    chroma
        .iter()
        .map(|frame| {
            let n = frame.len();
            let total: T = frame.iter().copied().sum();
            let mut out = vec![T::zero(); 6];
            if total <= T::zero() {
                return out;
            }
            for (j, c) in frame.iter().enumerate() {
                let w = *c / total;
                let semitone = j as f64 * 12.0 / n as f64;
                for (i, (theta, r)) in circles.iter().enumerate() {
                    let angle = theta * semitone;
                    out[2 * i] = out[2 * i] + w * T::lit(r * angle.sin());
                    out[2 * i + 1] = out[2 * i + 1] + w * T::lit(r * angle.cos());
                }
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{stft, AudioSegment, StftConfig};

    #[test]
    fn tone_maps_to_its_pitch_class() {
        for p in 0..6 {
            // centre of class p, two octaves up from C4 to stay well above bin spacing
            let f = 4.0 * C_REF_HZ * 2f64.powf(p as f64 / 6.0);
            let x = (0..8192).map(|i| 0.5 * (2.0 * std::f64::consts::PI * f * i as f64 / 22050.0).sin()).collect();
            let spec = stft(&AudioSegment::new(x, 22050).unwrap(), &StftConfig::default()).unwrap();
            for frame in chroma_stft(&spec, 6) {
                let argmax = frame.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
                assert_eq!(argmax, p);
                assert_eq!(frame[p], 1.0);
            }
        }
    }

    #[test]
    fn uniform_chroma_has_zero_tonnetz() {
        let t = tonnetz(&[vec![1.0f64; 6], vec![1.0f64; 12]]);
        for frame in t {
            assert!(frame.iter().all(|v| v.abs() < 1e-12), "{frame:?}");
        }
        assert_eq!(tonnetz(&[vec![0.0f64; 6]])[0], vec![0.0; 6]);
    }

    #[test]
    fn rotating_chroma_rotates_tonnetz_phase() {
        use std::f64::consts::PI;
        let chroma = vec![0.9, 0.1, 0.4, 0.0, 0.7, 0.2];
        let base = &tonnetz(std::slice::from_ref(&chroma))[0];
        for shift in 1..6 {
            let rotated: Vec<f64> = (0..6).map(|j| chroma[(j + 6 - shift) % 6]).collect();
            let t = &tonnetz(&[rotated])[0];
            for (i, theta) in [7.0 * PI / 6.0, 3.0 * PI / 2.0, 2.0 * PI / 3.0].iter().enumerate() {
                // each (sin, cos) pair is a phasor multiplied by exp(i theta * semitone shift)
                let phi = theta * 2.0 * shift as f64;
                let (s, c) = (base[2 * i], base[2 * i + 1]);
                let expect_s = s * phi.cos() + c * phi.sin();
                let expect_c = c * phi.cos() - s * phi.sin();
                assert!((t[2 * i] - expect_s).abs() < 1e-12);
                assert!((t[2 * i + 1] - expect_c).abs() < 1e-12);
            }
        }
    }
}
