use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioSegment;
use crate::{Error, Result, Scalar};

/// Reads integer or float PCM WAV; multi-channel audio is downmixed by
/// averaging the channels.
pub fn read_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioSegment<T>> {
    let mut reader = WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            let scale = 2f64.powi(i32::from(spec.bits_per_sample) - 1);
            reader.samples::<i32>().map(|s| s.map(|v| f64::from(v) / scale)).collect::<std::result::Result<_, _>>()?
        }
        SampleFormat::Float => {
            reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::invalid("truncated multi-channel frame in WAV data"));
    }
    let samples = interleaved
        .chunks(channels)
        .map(|frame| T::lit((frame.iter().sum::<f64>() / channels as f64).clamp(-1.0, 1.0)))
        .collect();
    AudioSegment::new(samples, spec.sample_rate)
}

pub fn write_wav_i16<T: Scalar>(path: impl AsRef<Path>, seg: &AudioSegment<T>) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: seg.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path.as_ref(), spec)?;
    for s in seg.samples() {
        let v = (s.as_f64() * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v)?;
    }
    w.finalize()?;
    Ok(())
}

pub fn write_wav_f32<T: Scalar>(path: impl AsRef<Path>, seg: &AudioSegment<T>) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: seg.sample_rate_hz(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path.as_ref(), spec)?;
    for s in seg.samples() {
        w.write_sample(s.as_f64() as f32)?;
    }
    w.finalize()?;
    Ok(())
}
