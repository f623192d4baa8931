use super::{Spectrogram, MAGNITUDE_FLOOR};
use crate::Scalar;

pub const DEFAULT_N_MELS: usize = 128;
pub const DEFAULT_N_MFCC: usize = 20;

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    6.4f64.ln() / 27.0
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz < MIN_LOG_HZ {
        hz / F_SP
    } else {
        MIN_LOG_MEL + (hz / MIN_LOG_HZ).ln() / log_step()
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel < MIN_LOG_MEL {
        mel * F_SP
    } else {
        MIN_LOG_HZ * (log_step() * (mel - MIN_LOG_MEL)).exp()
    }
}

/// Slaney-normalized triangular filters from 0 Hz to Nyquist, as an
/// `n_mels x n_bins` weight matrix.
pub fn mel_filterbank(sample_rate_hz: u32, frame_length: usize, n_mels: usize) -> Vec<Vec<f64>> {
    let n_bins = frame_length / 2 + 1;
    let nyq = f64::from(sample_rate_hz) / 2.0;
    let fft_freqs: Vec<f64> = (0..n_bins).map(|k| k as f64 * f64::from(sample_rate_hz) / frame_length as f64).collect();
    let (mlo, mhi) = (hz_to_mel(0.0), hz_to_mel(nyq));
    let pts: Vec<f64> =
        (0..n_mels + 2).map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (n_mels + 1) as f64)).collect();
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (pts[m], pts[m + 1], pts[m + 2]);
            let enorm = 2.0 / (hi - lo);
            fft_freqs
                .iter()
                .map(|&f| {
                    let up = (f - lo) / (mid - lo);
                    let down = (hi - f) / (hi - mid);
                    up.min(down).max(0.0) * enorm
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of `x`, first `n_out` coefficients.
pub fn dct_ortho<T: Scalar>(x: &[T], n_out: usize) -> Vec<T> {
    let n = x.len();
    let nf = n as f64;
    (0..n_out.min(n))
        .map(|k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            let sum: T = x
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    *v * T::lit((std::f64::consts::PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * nf)).cos())
                })
                .sum();
            sum * T::lit(scale)
        })
        .collect()
}

/// Per-frame MFCCs: mel filterbank over the power spectrum, `10 log10` with
/// the magnitude floor, then orthonormal DCT-II truncated to `n_coeffs`.
pub fn mfcc<T: Scalar>(spec: &Spectrogram<T>, n_mels: usize, n_coeffs: usize) -> Vec<Vec<T>> {
    let bank: Vec<Vec<T>> = mel_filterbank(spec.sample_rate_hz(), spec.frame_length(), n_mels)
        .into_iter()
        .map(|row| row.into_iter().map(T::lit).collect())
        .collect();
    let floor = T::lit(MAGNITUDE_FLOOR);
    let ten = T::lit(10.0);
    spec.power()
        .iter()
        .map(|power| {
            let log_mel: Vec<T> = bank
                .iter()
                .map(|w| {
                    let e: T = w.iter().zip(power).map(|(a, b)| *a * *b).sum();
                    ten * e.max(floor).log10()
                })
                .collect();
            dct_ortho(&log_mel, n_coeffs)
        })
        .collect()
}
