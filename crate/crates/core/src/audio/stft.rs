use num_complex::Complex;
use rustfft::FftPlanner;

use super::{AudioScalar, AudioSegment, StftConfig};
use crate::{Result, Scalar};

/// One-sided complex spectrogram, `frames x (frame_length / 2 + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram<T: Scalar> {
    frames: Vec<Vec<Complex<T>>>,
    sample_rate_hz: u32,
    frame_length: usize,
}

impl<T: Scalar> Spectrogram<T> {
    pub fn from_frames(frames: Vec<Vec<Complex<T>>>, sample_rate_hz: u32, frame_length: usize) -> Self {
        debug_assert!(frames.iter().all(|f| f.len() == frame_length / 2 + 1));
        Self { frames, sample_rate_hz, frame_length }
    }

    pub fn frames(&self) -> &[Vec<Complex<T>>] {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_bins(&self) -> usize {
        self.frame_length / 2 + 1
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn nyquist(&self) -> T {
        T::lit(f64::from(self.sample_rate_hz) / 2.0)
    }

    pub fn bin_width(&self) -> T {
        T::lit(f64::from(self.sample_rate_hz) / self.frame_length as f64)
    }

    pub fn bin_frequency(&self, bin: usize) -> T {
        T::count(bin) * self.bin_width()
    }

    pub fn bin_frequencies(&self) -> Vec<T> {
        (0..self.n_bins()).map(|k| self.bin_frequency(k)).collect()
    }

    pub fn magnitudes(&self) -> Vec<Vec<T>> {
        self.frames.iter().map(|f| f.iter().map(|c| c.norm()).collect()).collect()
    }

    pub fn power(&self) -> Vec<Vec<T>> {
        self.frames.iter().map(|f| f.iter().map(|c| c.norm_sqr()).collect()).collect()
    }
}

/// Short-time Fourier transform without padding: frame `i` covers samples
/// `i * hop .. i * hop + frame_length`.
pub fn stft<T: AudioScalar>(seg: &AudioSegment<T>, cfg: &StftConfig) -> Result<Spectrogram<T>> {
    let n_frames = cfg.check_segment(seg)?;
    let n = cfg.frame_length;
    let window: Vec<T> = cfg.window.coefficients(n);
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let samples = seg.samples();
    let frames = (0..n_frames)
        .map(|i| {
            let start = i * cfg.hop_length;
            let mut buf: Vec<Complex<T>> =
                samples[start..start + n].iter().zip(&window).map(|(s, w)| Complex::new(*s * *w, T::zero())).collect();
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf.truncate(n / 2 + 1);
            buf
        })
        .collect();
    Ok(Spectrogram { frames, sample_rate_hz: seg.sample_rate_hz(), frame_length: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::Window;
    use approx::assert_relative_eq;

    fn rect() -> StftConfig {
        StftConfig { frame_length: 256, hop_length: 128, window: Window::Rectangular }
    }

    #[test]
    fn dc_signal_lands_in_bin_zero() {
        let seg = AudioSegment::new(vec![0.5f64; 1024], 8000).unwrap();
        let spec = stft(&seg, &rect()).unwrap();
        for frame in spec.magnitudes() {
            assert_relative_eq!(frame[0], 0.5 * 256.0, max_relative = 1e-12);
            assert!(frame[1..].iter().all(|m| *m < 1e-9));
        }
    }

    #[test]
    fn bin_centred_sine_has_one_peak() {
        let sr = 8000u32;
        let k = 16usize;
        let f = k as f64 * f64::from(sr) / 256.0;
        let x: Vec<f64> =
            (0..1024).map(|i| 0.8 * (2.0 * std::f64::consts::PI * f * i as f64 / f64::from(sr)).sin()).collect();
        let spec = stft(&AudioSegment::new(x, sr).unwrap(), &rect()).unwrap();
        for frame in spec.magnitudes() {
            // analytic DFT of a bin-centred sinusoid: A*N/2 at bin k, zero elsewhere
            assert_relative_eq!(frame[k], 0.8 * 128.0, max_relative = 1e-9);
            let others: f64 = frame.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, m)| *m).sum();
            assert!(others < 1e-8, "leakage {others}");
        }
    }

    #[test]
    fn parseval_with_rectangular_window() {
        let x: Vec<f64> = (0..256).map(|i| ((i * 7919) % 200) as f64 / 100.0 - 1.0).collect();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spec = stft(&AudioSegment::new(x, 1000).unwrap(), &rect()).unwrap();
        let p = &spec.power()[0];
        let n = 256.0;
        let spectral = (p[0] + p[128] + 2.0 * p[1..128].iter().sum::<f64>()) / n;
        assert_relative_eq!(energy, spectral, max_relative = 1e-12);
    }

    #[test]
    fn frame_count_matches_formula() {
        for len in [256usize, 300, 511, 512, 1000] {
            let seg = AudioSegment::new(vec![0.0f64; len], 1000).unwrap();
            assert_eq!(stft(&seg, &rect()).unwrap().n_frames(), 1 + (len - 256) / 128);
        }
        let short = AudioSegment::new(vec![0.0f64; 100], 1000).unwrap();
        assert!(stft(&short, &rect()).is_err());
    }
}
