use serde::{Deserialize, Serialize};

use crate::stats::{average_ranks, chi_square_sf, normal_two_sided_p, tie_sizes};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KruskalWallis<T: Scalar> {
    pub h: T,
    pub p: T,
    pub df: usize,
}

fn check_groups<T: Scalar>(groups: &[Vec<T>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::invalid("rank test needs at least two groups"));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::invalid(format!("group {i} is empty")));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("group samples must be finite"));
    }
    Ok(())
}

fn tie_sum(pooled: &[f64]) -> f64 {
    tie_sizes(pooled).into_iter().map(|t| (t * t * t - t) as f64).sum()
}

/// Pooled ranks split back into groups, plus the pooled values.
fn pooled_ranks<T: Scalar>(groups: &[Vec<T>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let pooled: Vec<f64> = groups.iter().flatten().map(|v| v.as_f64()).collect();
    let ranks = average_ranks(&pooled);
    let mut out = Vec::with_capacity(groups.len());
    let mut offset = 0;
    for g in groups {
        out.push(ranks[offset..offset + g.len()].to_vec());
        offset += g.len();
    }
    (out, pooled)
}

/// Kruskal-Wallis H with tie correction and its chi-square p-value.
/// When every observation is tied, H is 0 and p is 1.
pub fn kruskal_wallis<T: Scalar>(groups: &[Vec<T>]) -> Result<KruskalWallis<T>> {
    check_groups(groups)?;
    let (ranks, pooled) = pooled_ranks(groups);
    let n = pooled.len() as f64;
    let df = groups.len() - 1;
    let correction = 1.0 - tie_sum(&pooled) / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis { h: T::zero(), p: T::one(), df });
    }
    let sum: f64 = ranks.iter().map(|r| r.iter().sum::<f64>().powi(2) / r.len() as f64).sum();
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(KruskalWallis { h: T::lit(h), p: T::lit(chi_square_sf(h, df as f64)), df })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    None,
    #[default]
    Bonferroni,
}

impl Adjustment {
    pub fn apply(self, p: f64, m: usize) -> f64 {
        match self {
            Adjustment::None => p,
            Adjustment::Bonferroni => (p * m as f64).min(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DunnPair<T: Scalar> {
    pub a: usize,
    pub b: usize,
    /// Positive when group `a` has the higher mean rank.
    pub z: T,
    pub p: T,
    pub p_adj: T,
    pub significant: bool,
}

/// Dunn's pairwise comparisons of mean ranks, all `k(k-1)/2` pairs in
/// lexicographic order.
pub fn dunn_posthoc<T: Scalar>(groups: &[Vec<T>], adjust: Adjustment, alpha: f64) -> Result<Vec<DunnPair<T>>> {
    check_groups(groups)?;
    let (ranks, pooled) = pooled_ranks(groups);
    let n = pooled.len() as f64;
    let tie = tie_sum(&pooled) / (12.0 * (n - 1.0).max(1.0));
    let base = n * (n + 1.0) / 12.0 - tie;
    let mean_rank: Vec<f64> = ranks.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let k = groups.len();
    let m = k * (k - 1) / 2;
    let mut out = Vec::with_capacity(m);
    for a in 0..k {
        for b in a + 1..k {
            let se = (base * (1.0 / groups[a].len() as f64 + 1.0 / groups[b].len() as f64)).sqrt();
            let z = if se > 0.0 { (mean_rank[a] - mean_rank[b]) / se } else { 0.0 };
            let p = normal_two_sided_p(z);
            let p_adj = adjust.apply(p, m);
            out.push(DunnPair { a, b, z: T::lit(z), p: T::lit(p), p_adj: T::lit(p_adj), significant: p_adj < alpha });
        }
    }
    Ok(out)
}

/// Standardized mean difference with Bessel-corrected pooled variance.
pub fn cohens_d<T: Scalar>(tagged: &[T], untagged: &[T]) -> Result<T> {
    let (n1, n2) = (tagged.len(), untagged.len());
    if n1 == 0 || n2 == 0 || n1 + n2 < 3 {
        return Err(Error::invalid("Cohen's d needs two non-empty samples with at least three values in total"));
    }
    let m1 = crate::stats::mean(tagged);
    let m2 = crate::stats::mean(untagged);
    let ss = |x: &[T], m: T| x.iter().map(|v| (*v - m) * (*v - m)).sum::<T>();
    let pooled = (ss(tagged, m1) + ss(untagged, m2)) / T::count(n1 + n2 - 2);
    // variance at the level of rounding noise counts as zero
    let scale = tagged.iter().chain(untagged).fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = T::epsilon() * T::lit(64.0) * scale;
    if !(pooled.sqrt() > floor) {
        return Err(Error::degenerate("pooled variance is zero"));
    }
    Ok((m1 - m2) / pooled.sqrt())
}
