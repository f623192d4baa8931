use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{cohens_d, dunn_posthoc, kruskal_wallis, Adjustment, DunnPair};
use crate::corpus::CorpusTable;
use crate::taste::Taste;
use crate::{Result, Scalar};

/// Rows grouped by genre; rows without a genre are left out.
fn genre_groups<T: Scalar>(corpus: &CorpusTable<T>) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (row, g) in corpus.genres.iter().enumerate() {
        if let Some(g) = g {
            groups.entry(g.clone()).or_default().push(row);
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenreTest<T: Scalar> {
    pub flavor: Taste,
    pub h: T,
    pub p: T,
    pub pairs: Vec<DunnPair<T>>,
    pub n_significant: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenreTestReport<T: Scalar> {
    pub genres: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub alpha: f64,
    pub flavors: Vec<GenreTest<T>>,
}

impl<T: Scalar> GenreTestReport<T> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let m = self.genres.len() * self.genres.len().saturating_sub(1) / 2;
        let _ = writeln!(s, "{:<8} {:>14} {:>12} {:>12}", "flavor", "H", "p", "pairs");
        for f in &self.flavors {
            let _ = writeln!(
                s,
                "{:<8} {:>14.3} {:>12.3e} {:>12}",
                f.flavor.name(),
                f.h,
                f.p.as_f64(),
                format!("{}/{m}", f.n_significant)
            );
        }
        s
    }
}

/// Kruskal-Wallis across genres and Dunn post-hoc comparisons, per flavor.
pub fn genre_tests<T: Scalar>(corpus: &CorpusTable<T>, adjust: Adjustment, alpha: f64) -> Result<GenreTestReport<T>> {
    let groups = genre_groups(corpus);
    let flavors = Taste::ALL
        .par_iter()
        .map(|&flavor| {
            let col = corpus.flavor_column(flavor);
            let samples: Vec<Vec<T>> = groups.values().map(|rows| rows.iter().map(|&r| col[r]).collect()).collect();
            let kw = kruskal_wallis(&samples)?;
            let pairs = dunn_posthoc(&samples, adjust, alpha)?;
            let n_significant = pairs.iter().filter(|p| p.significant).count();
            Ok(GenreTest { flavor, h: kw.h, p: kw.p, pairs, n_significant })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GenreTestReport {
        genres: groups.keys().cloned().collect(),
        group_sizes: groups.values().map(Vec::len).collect(),
        alpha,
        flavors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoodEffect<T: Scalar> {
    pub mood: String,
    pub flavor: Taste,
    /// `None` when both groups are constant for this flavor.
    pub d: Option<T>,
    pub n_tagged: usize,
    pub n_untagged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoodEffectReport<T: Scalar> {
    pub min_occurrences: usize,
    pub moods: Vec<String>,
    pub effects: Vec<MoodEffect<T>>,
}

impl<T: Scalar> MoodEffectReport<T> {
    /// Effects ranked by absolute size, largest first.
    pub fn to_text(&self, limit: usize) -> String {
        let mut ranked: Vec<&MoodEffect<T>> = self.effects.iter().filter(|e| e.d.is_some()).collect();
        ranked.sort_by(|a, b| {
            let (da, db) = (a.d.unwrap_or_default().abs(), b.d.unwrap_or_default().abs());
            db.partial_cmp(&da).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.mood.cmp(&b.mood))
        });
        let mut s = String::new();
        let _ = writeln!(s, "{:<24} {:<8} {:>8} {:>8}", "mood", "flavor", "d", "n");
        for e in ranked.into_iter().take(limit) {
            let _ =
                writeln!(s, "{:<24} {:<8} {:>8.3} {:>8}", e.mood, e.flavor.name(), e.d.unwrap_or_default(), e.n_tagged);
        }
        s
    }
}

/// Cohen's d of each flavor for tracks carrying a mood tag against all
/// tracks not carrying it, for tags with at least `min_occurrences` uses.
pub fn mood_effects<T: Scalar>(corpus: &CorpusTable<T>, min_occurrences: usize) -> Result<MoodEffectReport<T>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for tags in &corpus.moods {
        for t in tags {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let moods: Vec<String> =
        counts.into_iter().filter(|(_, c)| *c >= min_occurrences.max(1)).map(|(m, _)| m.to_string()).collect();
    let columns: Vec<Vec<T>> = Taste::ALL.iter().map(|&t| corpus.flavor_column(t)).collect();
    let effects = moods
        .par_iter()
        .map(|mood| {
            let tagged: BTreeSet<usize> = (0..corpus.len()).filter(|&r| corpus.moods[r].contains(mood)).collect();
            Taste::ALL
                .iter()
                .map(|&flavor| {
                    let col = &columns[flavor.index()];
                    let mut a = Vec::with_capacity(tagged.len());
                    let mut b = Vec::with_capacity(col.len() - tagged.len());
                    for (r, &v) in col.iter().enumerate() {
                        if tagged.contains(&r) {
                            a.push(v);
                        } else {
                            b.push(v);
                        }
                    }
                    let d = match cohens_d(&a, &b) {
                        Ok(d) => Some(d),
                        Err(e) if e.is_degenerate() => None,
                        Err(_) if b.is_empty() => None,
                        Err(e) => return Err(e),
                    };
                    Ok(MoodEffect { mood: mood.clone(), flavor, d, n_tagged: a.len(), n_untagged: b.len() })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(MoodEffectReport { min_occurrences, moods, effects })
}

/// Mean flavor vector per genre, the input to genre clustering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenreFlavorMatrix<T: Scalar> {
    pub genres: Vec<String>,
    pub counts: Vec<usize>,
    pub means: Vec<[T; 5]>,
}

impl<T: Scalar> GenreFlavorMatrix<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("genre,n");
        for t in Taste::ALL {
            let _ = write!(s, ",{t}");
        }
        s.push('\n');
        for ((g, n), row) in self.genres.iter().zip(&self.counts).zip(&self.means) {
            let _ = write!(s, "{g},{n}");
            for v in row {
                let _ = write!(s, ",{v:.6}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn genre_flavor_matrix<T: Scalar>(corpus: &CorpusTable<T>) -> GenreFlavorMatrix<T> {
    let groups = genre_groups(corpus);
    let means = groups
        .values()
        .map(|rows| {
            let mut m = [T::zero(); 5];
            for (c, v) in m.iter_mut().enumerate() {
                *v = rows.iter().map(|&r| corpus.flavors[(r, c)]).sum::<T>() / T::count(rows.len());
            }
            m
        })
        .collect();
    GenreFlavorMatrix {
        genres: groups.keys().cloned().collect(),
        counts: groups.values().map(Vec::len).collect(),
        means,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taste::TasteVector;

    fn corpus() -> CorpusTable<f64> {
        let n = 60;
        let ids: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let vectors: Vec<TasteVector<f64>> = (0..n)
            .map(|i| {
                let sweet = if i % 3 == 0 { 0.8 } else { 0.1 } + (i % 7) as f64 * 0.01;
                TasteVector::new([sweet, 0.1 + (i % 5) as f64 * 0.01, 0.1, 0.1 + (i % 4) as f64 * 0.02, 0.05]).unwrap()
            })
            .collect();
        let mut c = CorpusTable::from_annotations(ids, &vectors).unwrap();
        for i in 0..n {
            c.genres[i] = Some(["pop", "jazz", "rock"][i % 3].to_string());
            if i % 3 == 0 {
                c.moods[i].insert("happy".into());
            }
            if i == 5 {
                c.moods[i].insert("rare".into());
            }
        }
        c
    }

    #[test]
    fn genre_effect_on_sweetness() {
        let r = genre_tests(&corpus(), Adjustment::Bonferroni, 0.05).unwrap();
        assert_eq!(r.genres, vec!["jazz", "pop", "rock"]);
        assert_eq!(r.group_sizes, vec![20, 20, 20]);
        let sweet = &r.flavors[0];
        assert!(sweet.p < 1e-6);
        assert_eq!(sweet.pairs.len(), 3);
        // jazz vs rock do not differ in sweetness
        assert!(!sweet.pairs[1].significant);
        assert_eq!(sweet.n_significant, 2);
        assert!(r.to_text().contains("2/3"));
    }

    #[test]
    fn mood_threshold_and_direction() {
        let r = mood_effects(&corpus(), 10).unwrap();
        assert_eq!(r.moods, vec!["happy"]);
        assert_eq!(r.effects.len(), 5);
        assert!(r.effects[0].d.unwrap() > 2.0);
        assert_eq!(r.effects[0].n_tagged, 20);
        assert_eq!(r.effects[2].d, None);
    }

    #[test]
    fn genre_means() {
        let m = genre_flavor_matrix(&corpus());
        assert_eq!(m.genres.len(), 3);
        assert!(m.means[1][0] > 0.8);
        assert_eq!(m.to_csv().lines().count(), 4);
    }
}
