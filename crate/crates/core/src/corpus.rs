//! Row-aligned audio features, flavor annotations and text metadata for
//! one corpus.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;

use crate::taste::{Taste, TasteVector};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusTable<T: Scalar> {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    /// n x p
    pub features: DMatrix<T>,
    /// n x 5, columns in [`Taste::ALL`] order
    pub flavors: DMatrix<T>,
    pub genres: Vec<Option<String>>,
    pub moods: Vec<BTreeSet<String>>,
    pub texts: Vec<String>,
}

impl<T: Scalar> CorpusTable<T> {
    pub fn new(
        ids: Vec<String>,
        feature_names: Vec<String>,
        features: DMatrix<T>,
        flavors: DMatrix<T>,
    ) -> Result<Self> {
        let n = ids.len();
        let table = Self {
            genres: vec![None; n],
            moods: vec![BTreeSet::new(); n],
            texts: vec![String::new(); n],
            ids,
            feature_names,
            features,
            flavors,
        };
        table.validate()?;
        Ok(table)
    }

    /// Corpus with flavor annotations only, as used for retrieval.
    pub fn from_annotations(ids: Vec<String>, vectors: &[TasteVector<T>]) -> Result<Self> {
        let n = vectors.len();
        let flavors = DMatrix::from_fn(n, 5, |r, c| vectors[r].components()[c]);
        Self::new(ids, Vec::new(), DMatrix::zeros(n, 0), flavors)
    }

    pub fn with_metadata(
        mut self,
        genres: Vec<Option<String>>,
        moods: Vec<BTreeSet<String>>,
        texts: Vec<String>,
    ) -> Result<Self> {
        self.genres = genres;
        self.moods = moods;
        self.texts = texts;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.features.nrows() != n
            || self.flavors.nrows() != n
            || self.genres.len() != n
            || self.moods.len() != n
            || self.texts.len() != n
        {
            return Err(Error::invalid("corpus columns are not row-aligned"));
        }
        if self.flavors.ncols() != 5 {
            return Err(Error::invalid(format!("corpus must carry 5 flavor columns, found {}", self.flavors.ncols())));
        }
        if self.features.ncols() != self.feature_names.len() {
            return Err(Error::invalid("feature matrix width differs from the manifest"));
        }
        let mut seen = HashMap::with_capacity(n);
        for (row, id) in self.ids.iter().enumerate() {
            if let Some(first) = seen.insert(id.as_str(), row) {
                return Err(Error::invalid(format!("duplicate id {id:?} in rows {first} and {row}")));
            }
        }
        let mut names = BTreeSet::new();
        for name in &self.feature_names {
            if !names.insert(name) {
                return Err(Error::invalid(format!("duplicate feature name {name:?}")));
            }
        }
        for (i, v) in self.features.iter().enumerate() {
            if !v.is_finite() {
                let (r, c) = (i % n.max(1), i / n.max(1));
                return Err(Error::invalid(format!(
                    "non-finite feature value in row {r}, column {}",
                    self.feature_names[c]
                )));
            }
        }
        for (i, v) in self.flavors.iter().enumerate() {
            if !v.is_finite() || *v < T::zero() {
                let (r, c) = (i % n.max(1), i / n.max(1));
                return Err(Error::invalid(format!(
                    "flavor {} in row {r} must be finite and >= 0, got {v}",
                    Taste::ALL[c]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn flavor_column(&self, taste: Taste) -> Vec<T> {
        self.flavors.column(taste.index()).iter().copied().collect()
    }

    pub fn feature_column(&self, index: usize) -> Vec<T> {
        self.features.column(index).iter().copied().collect()
    }

    pub fn taste_vector(&self, row: usize) -> TasteVector<T> {
        TasteVector::new(std::array::from_fn(|c| self.flavors[(row, c)])).expect("validated flavors are non-negative")
    }

    /// Restricts and reorders the feature columns to `names`.
    pub fn select_features(&self, names: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = self.feature_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let cols = names
            .iter()
            .map(|n| {
                index
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("feature {n:?} missing from corpus")))
            })
            .collect::<Result<Vec<_>>>()?;
        let features = DMatrix::from_fn(self.len(), cols.len(), |r, c| self.features[(r, cols[c])]);
        Ok(Self { feature_names: names.to_vec(), features, ..self.clone() })
    }

    /// Feature names present in both corpora, in `self`'s order.
    pub fn shared_features(&self, other: &Self) -> Vec<String> {
        let theirs: BTreeSet<&String> = other.feature_names.iter().collect();
        self.feature_names.iter().filter(|n| theirs.contains(n)).cloned().collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(rows),
            flavors: self.flavors.select_rows(rows),
            genres: rows.iter().map(|&r| self.genres[r].clone()).collect(),
            moods: rows.iter().map(|&r| self.moods[r].clone()).collect(),
            texts: rows.iter().map(|&r| self.texts[r].clone()).collect(),
        }
    }
}
