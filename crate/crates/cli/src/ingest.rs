//! CSV readers and writers for every pipeline input. Readers check the
//! header, then each row, and report problems as `file:line: column: ...`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use savor_core::audio::FeatureKey;
use savor_core::corpus::CorpusTable;
use savor_core::perceptual::{RatingRecord, Stimulus};
use savor_core::taste::{CompoundRecord, NutrientRecord, RawTaste, Taste, TasteVector};

use crate::error::{CliError, CliResult};

const RESERVED: [&str; 4] = ["id", "genre", "moods", "text"];

/// A CSV file held in memory with its header and source line numbers.
struct Sheet {
    path: String,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Sheet {
    fn read(path: &Path) -> CliResult<Self> {
        let name = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::validation(format!("{name}: {e}")))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::validation(format!("{name}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.iter().all(String::is_empty) {
            return Err(CliError::validation(format!("{name}: file is empty (no header row)")));
        }
        let mut seen = BTreeSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(CliError::validation(format!("{name}:1: duplicate column '{h}'")));
            }
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| CliError::validation(format!("{name}: {e}")))?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        if rows.is_empty() {
            return Err(CliError::validation(format!("{name}: no data rows")));
        }
        Ok(Sheet { path: name, headers, rows })
    }

    fn opt_col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn col(&self, name: &str) -> CliResult<usize> {
        self.opt_col(name)
            .ok_or_else(|| CliError::validation(format!("{}:1: missing required column '{name}'", self.path)))
    }

    fn err(&self, line: u64, col: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::validation(format!("{}:{line}: column '{}': {msg}", self.path, self.headers[col]))
    }

    fn text<'a>(&self, rec: &'a csv::StringRecord, line: u64, col: usize) -> CliResult<&'a str> {
        match rec.get(col) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(self.err(line, col, "value is empty")),
        }
    }

    fn number(&self, rec: &csv::StringRecord, line: u64, col: usize) -> CliResult<f64> {
        let raw = self.text(rec, line, col)?;
        let v: f64 = raw.parse().map_err(|_| self.err(line, col, format!("'{raw}' is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(line, col, format!("'{raw}' is not finite")));
        }
        Ok(v)
    }

    fn non_negative(&self, rec: &csv::StringRecord, line: u64, col: usize) -> CliResult<f64> {
        let v = self.number(rec, line, col)?;
        if v < 0.0 {
            return Err(self.err(line, col, format!("{v} is negative")));
        }
        Ok(v)
    }

    fn parse<T: FromStr>(&self, rec: &csv::StringRecord, line: u64, col: usize) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(rec, line, col)?;
        raw.parse().map_err(|e| self.err(line, col, e))
    }

    fn flag(&self, rec: &csv::StringRecord, line: u64, col: usize) -> CliResult<bool> {
        match self.text(rec, line, col)?.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(self.err(line, col, format!("'{other}' is not a yes/no value"))),
        }
    }

    fn taste_columns(&self) -> CliResult<[usize; 5]> {
        let mut cols = [0; 5];
        for (slot, t) in cols.iter_mut().zip(Taste::ALL) {
            *slot = self.col(t.name())?;
        }
        Ok(cols)
    }

    fn taste_vector(&self, rec: &csv::StringRecord, line: u64, cols: &[usize; 5]) -> CliResult<TasteVector<f64>> {
        let mut v = [0.0; 5];
        for (slot, &c) in v.iter_mut().zip(cols) {
            *slot = self.non_negative(rec, line, c)?;
        }
        Ok(TasteVector::new(v)?)
    }
}

fn check_unique<'a>(sheet: &Sheet, col: usize, values: impl Iterator<Item = (u64, &'a str)>) -> CliResult<()> {
    let mut seen = BTreeSet::new();
    for (line, v) in values {
        if !seen.insert(v) {
            return Err(sheet.err(line, col, format!("duplicate id '{v}'")));
        }
    }
    Ok(())
}

/// Reads an annotated corpus: `id`, the five taste columns, optional
/// `genre`, `moods` (`;`-separated) and `text`, and feature columns named
/// `<feature>_mean` / `<feature>_std`.
pub fn read_corpus(path: &Path) -> CliResult<CorpusTable<f64>> {
    let sheet = Sheet::read(path)?;
    let id = sheet.col("id")?;
    let tastes = sheet.taste_columns()?;
    let (genre, moods, text) = (sheet.opt_col("genre"), sheet.opt_col("moods"), sheet.opt_col("text"));
    let mut feature_cols = Vec::new();
    for (c, h) in sheet.headers.iter().enumerate() {
        if RESERVED.contains(&h.as_str()) || Taste::ALL.iter().any(|t| t.name() == h) {
            continue;
        }
        let base = h.strip_suffix("_mean").or_else(|| h.strip_suffix("_std"));
        if base.and_then(|b| b.parse::<FeatureKey>().ok()).is_none() {
            return Err(CliError::validation(format!(
                "{}:1: manifest mismatch: column '{h}' is neither metadata, a taste nor a feature column",
                sheet.path
            )));
        }
        feature_cols.push(c);
    }
    let n = sheet.rows.len();
    let mut ids = Vec::with_capacity(n);
    let mut features = DMatrix::zeros(n, feature_cols.len());
    let mut flavors = DMatrix::zeros(n, 5);
    let mut genres = Vec::with_capacity(n);
    let mut mood_sets = Vec::with_capacity(n);
    let mut texts = Vec::with_capacity(n);
    for (r, (line, rec)) in sheet.rows.iter().enumerate() {
        ids.push(sheet.text(rec, *line, id)?.to_string());
        for (j, &c) in feature_cols.iter().enumerate() {
            features[(r, j)] = sheet.number(rec, *line, c)?;
        }
        for (t, &c) in tastes.iter().enumerate() {
            flavors[(r, t)] = sheet.non_negative(rec, *line, c)?;
        }
        let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).unwrap_or("").to_string();
        let g = field(genre);
        genres.push(if g.is_empty() { None } else { Some(g) });
        mood_sets.push(field(moods).split(';').map(str::trim).filter(|m| !m.is_empty()).map(str::to_string).collect());
        texts.push(field(text));
    }
    check_unique(&sheet, id, sheet.rows.iter().zip(&ids).map(|((l, _), v)| (*l, v.as_str())))?;
    let names = feature_cols.iter().map(|&c| sheet.headers[c].clone()).collect();
    let table = CorpusTable::new(ids, names, features, flavors)?.with_metadata(genres, mood_sets, texts)?;
    Ok(table)
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::validation(format!("{}: {e}", path.display()))
}

/// Writes a corpus in the layout [`read_corpus`] accepts. Values use the
/// shortest representation that parses back to the same number.
pub fn write_corpus(path: &Path, corpus: &CorpusTable<f64>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    header.extend(Taste::ALL.iter().map(|t| t.name().to_string()));
    header.extend(corpus.feature_names.iter().cloned());
    w.write_record(&header).map_err(write_err(path))?;
    for r in 0..corpus.len() {
        let mut row = vec![
            corpus.ids[r].clone(),
            corpus.genres[r].clone().unwrap_or_default(),
            corpus.moods[r].iter().cloned().collect::<Vec<_>>().join(";"),
            corpus.texts[r].clone(),
        ];
        row.extend((0..5).map(|c| corpus.flavors[(r, c)].to_string()));
        row.extend((0..corpus.feature_names.len()).map(|c| corpus.features[(r, c)].to_string()));
        w.write_record(&row).map_err(write_err(path))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and rows of already formatted fields.
pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(write_err(path))?;
    for r in rows {
        w.write_record(r).map_err(write_err(path))?;
    }
    w.flush()?;
    Ok(())
}

/// `food_id, compound_id, concentration_mg_per_100g` and one probability
/// column per raw taste (`sweet ... spicy, umami`).
pub fn read_compounds(path: &Path) -> CliResult<Vec<CompoundRecord<f64>>> {
    let sheet = Sheet::read(path)?;
    let (food, compound, conc) =
        (sheet.col("food_id")?, sheet.col("compound_id")?, sheet.col("concentration_mg_per_100g")?);
    let probs: Vec<usize> = RawTaste::ALL.iter().map(|t| sheet.col(t.name())).collect::<CliResult<_>>()?;
    sheet
        .rows
        .iter()
        .map(|(line, rec)| {
            let mut p = [0.0; 6];
            for (slot, &c) in p.iter_mut().zip(&probs) {
                *slot = sheet.non_negative(rec, *line, c)?;
                if *slot > 1.0 {
                    return Err(sheet.err(*line, c, format!("probability {slot} exceeds 1")));
                }
            }
            Ok(CompoundRecord {
                food_id: sheet.text(rec, *line, food)?.to_string(),
                compound_id: sheet.text(rec, *line, compound)?.to_string(),
                concentration_mg_per_100g: sheet.non_negative(rec, *line, conc)?,
                taste_probs: p,
            })
        })
        .collect()
}

/// `food_id, nutrient_id, amount` and an optional `taste` label column.
pub fn read_nutrients(path: &Path) -> CliResult<Vec<NutrientRecord<f64>>> {
    let sheet = Sheet::read(path)?;
    let (food, nutrient, amount) = (sheet.col("food_id")?, sheet.col("nutrient_id")?, sheet.col("amount")?);
    let taste = sheet.opt_col("taste");
    sheet
        .rows
        .iter()
        .map(|(line, rec)| {
            let mapped_taste = match taste {
                Some(c) if rec.get(c).is_some_and(|v| !v.is_empty()) => Some(sheet.parse::<RawTaste>(rec, *line, c)?),
                _ => None,
            };
            Ok(NutrientRecord {
                food_id: sheet.text(rec, *line, food)?.to_string(),
                nutrient_id: sheet.text(rec, *line, nutrient)?.to_string(),
                amount: sheet.non_negative(rec, *line, amount)?,
                mapped_taste,
            })
        })
        .collect()
}

/// `nutrient_id, taste`.
pub fn read_nutrient_map(path: &Path) -> CliResult<BTreeMap<String, RawTaste>> {
    let sheet = Sheet::read(path)?;
    let (nutrient, taste) = (sheet.col("nutrient_id")?, sheet.col("taste")?);
    let mut map = BTreeMap::new();
    for (line, rec) in &sheet.rows {
        let id = sheet.text(rec, *line, nutrient)?.to_string();
        if map.insert(id.clone(), sheet.parse::<RawTaste>(rec, *line, taste)?).is_some() {
            return Err(sheet.err(*line, nutrient, format!("duplicate id '{id}'")));
        }
    }
    Ok(map)
}

/// `food_id, food_group`.
pub fn read_foods(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let sheet = Sheet::read(path)?;
    let (food, group) = (sheet.col("food_id")?, sheet.col("food_group")?);
    let mut map = BTreeMap::new();
    for (line, rec) in &sheet.rows {
        let id = sheet.text(rec, *line, food)?.to_string();
        if map.insert(id.clone(), sheet.text(rec, *line, group)?.to_string()).is_some() {
            return Err(sheet.err(*line, food, format!("duplicate id '{id}'")));
        }
    }
    Ok(map)
}

/// `dish_id, food_id`, one row per ingredient.
pub fn read_dishes(path: &Path) -> CliResult<BTreeMap<String, Vec<String>>> {
    let sheet = Sheet::read(path)?;
    let (dish, food) = (sheet.col("dish_id")?, sheet.col("food_id")?);
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (line, rec) in &sheet.rows {
        map.entry(sheet.text(rec, *line, dish)?.to_string())
            .or_default()
            .push(sheet.text(rec, *line, food)?.to_string());
    }
    Ok(map)
}

/// `target_id` and the five taste columns.
pub fn read_targets(path: &Path) -> CliResult<Vec<(String, TasteVector<f64>)>> {
    let sheet = Sheet::read(path)?;
    let id = sheet.col("target_id")?;
    let tastes = sheet.taste_columns()?;
    let out: Vec<(String, TasteVector<f64>)> = sheet
        .rows
        .iter()
        .map(|(line, rec)| Ok((sheet.text(rec, *line, id)?.to_string(), sheet.taste_vector(rec, *line, &tastes)?)))
        .collect::<CliResult<_>>()?;
    check_unique(&sheet, id, sheet.rows.iter().zip(&out).map(|((l, _), v)| (*l, v.0.as_str())))?;
    Ok(out)
}

/// `target_id, track_id` and the five taste columns of the target.
pub fn read_stimuli(path: &Path) -> CliResult<Vec<Stimulus<f64>>> {
    let sheet = Sheet::read(path)?;
    let (target, track) = (sheet.col("target_id")?, sheet.col("track_id")?);
    let tastes = sheet.taste_columns()?;
    let out: Vec<Stimulus<f64>> = sheet
        .rows
        .iter()
        .map(|(line, rec)| {
            Ok(Stimulus {
                target_id: sheet.text(rec, *line, target)?.to_string(),
                track_id: sheet.text(rec, *line, track)?.to_string(),
                target: sheet.taste_vector(rec, *line, &tastes)?,
            })
        })
        .collect::<CliResult<_>>()?;
    check_unique(&sheet, track, sheet.rows.iter().zip(&out).map(|((l, _), s)| (*l, s.track_id.as_str())))?;
    Ok(out)
}

/// `subject_id, track_id`, the five tastes as integers 1-7, `device`,
/// `hearing_impairment`, `taste_smell_impairment`.
pub fn read_ratings(path: &Path) -> CliResult<Vec<RatingRecord>> {
    let sheet = Sheet::read(path)?;
    let (subject, track) = (sheet.col("subject_id")?, sheet.col("track_id")?);
    let tastes = sheet.taste_columns()?;
    let device = sheet.opt_col("device");
    let (hearing, smell) = (sheet.col("hearing_impairment")?, sheet.col("taste_smell_impairment")?);
    sheet
        .rows
        .iter()
        .map(|(line, rec)| {
            let mut ratings = [0u8; 5];
            for (slot, &c) in ratings.iter_mut().zip(&tastes) {
                let v: u8 = sheet.parse(rec, *line, c)?;
                if !(1..=7).contains(&v) {
                    return Err(sheet.err(*line, c, format!("rating {v} outside 1-7")));
                }
                *slot = v;
            }
            Ok(RatingRecord {
                subject_id: sheet.text(rec, *line, subject)?.to_string(),
                track_id: sheet.text(rec, *line, track)?.to_string(),
                ratings,
                device: device.and_then(|c| rec.get(c)).unwrap_or("").to_string(),
                hearing_impairment: sheet.flag(rec, *line, hearing)?,
                taste_smell_impairment: sheet.flag(rec, *line, smell)?,
            })
        })
        .collect()
}
