use super::{AudioSegment, StftConfig};
use crate::{Result, Scalar};

fn frames<'a, T: Scalar>(seg: &'a AudioSegment<T>, cfg: &StftConfig) -> Result<impl Iterator<Item = &'a [T]>> {
    let n = cfg.check_segment(seg)?;
    let (len, hop) = (cfg.frame_length, cfg.hop_length);
    Ok((0..n).map(move |i| &seg.samples()[i * hop..i * hop + len]))
}

/// Fraction of adjacent sample pairs whose sign differs, per frame. Zero
/// counts as positive.
pub fn zero_crossing_rate<T: Scalar>(seg: &AudioSegment<T>, cfg: &StftConfig) -> Result<Vec<T>> {
    let denom = T::count(cfg.frame_length);
    Ok(frames(seg, cfg)?
        .map(|f| {
            let crossings = f.windows(2).filter(|w| (w[0] >= T::zero()) != (w[1] >= T::zero())).count();
            T::count(crossings) / denom
        })
        .collect())
}

/// Root-mean-square of the raw samples in each frame.
pub fn rms_energy<T: Scalar>(seg: &AudioSegment<T>, cfg: &StftConfig) -> Result<Vec<T>> {
    let denom = T::count(cfg.frame_length);
    Ok(frames(seg, cfg)?.map(|f| (f.iter().map(|s| *s * *s).sum::<T>() / denom).sqrt()).collect())
}
