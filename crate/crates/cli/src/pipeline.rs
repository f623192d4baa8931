//! One function per pipeline stage. Stages read their inputs from the run
//! configuration, write files under the output directory and return the
//! relative paths they wrote.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use savor_core::audio::{extract_features, read_wav, FeatureKey, FeatureManifest};
use savor_core::matching::{match_targets, mean_top_compatibility, MatchConfig, Metric};
use savor_core::perceptual::alignment_report;
use savor_core::taste::{
    blend_dish, build_food_profiles, default_grid, sweep_weights, Taste, TasteVector, WeightConfig,
};
use savor_core::text::{average_linkage, cluster_texts, genre_flavor_matrix, genre_tests, mood_effects};
use savor_core::transfer::transfer_report;
use serde::Serialize;

use crate::config::{MatchCorpus, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest;
use crate::manifest::{RunManifest, StageRecord, StageStatus};

/// Shared state of one invocation.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub manifest: RunManifest,
    pub record_timings: bool,
}

/// Files and warnings produced by one stage.
#[derive(Default)]
pub struct StageOutput {
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

impl StageOutput {
    fn text(&mut self, run: &Run, rel: &str, content: &str) -> CliResult<()> {
        let path = run.out.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, content)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, run: &Run, rel: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(run, rel, &s)
    }

    fn csv(&mut self, run: &Run, rel: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        ingest::write_rows(&run.out.join(rel), header, rows)?;
        self.files.push(rel.to_string());
        Ok(())
    }
}

pub type Stage = fn(&mut Run) -> CliResult<StageOutput>;

/// Stage name, entry point and `(input, configured)` requirements.
pub type StagePlan = (&'static str, Stage, Vec<(&'static str, bool)>);

impl Run {
    pub fn new(command: &str, config: RunConfig, out: PathBuf, record_timings: bool) -> Self {
        let manifest = RunManifest::new(command, &config);
        Run { config, out, manifest, record_timings }
    }

    /// Path of a configured input, recording its digest.
    fn input(&mut self, role: &str, path: Option<PathBuf>) -> CliResult<PathBuf> {
        let path = path.ok_or_else(|| CliError::validation(format!("no '{role}' input configured (inputs.{role})")))?;
        if !path.exists() {
            return Err(CliError::validation(format!("{role} input {} does not exist", path.display())));
        }
        self.manifest.add_input(role, &path)?;
        Ok(path)
    }

    fn optional_input(&mut self, role: &str, path: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        path.map(|p| self.input(role, Some(p))).transpose()
    }

    pub fn run_stage(&mut self, name: &str, stage: Stage) -> CliResult<()> {
        let start = Instant::now();
        let out = stage(self).map_err(|e| e.context(name))?;
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            status: StageStatus::Ok,
            outputs: out.files,
            warnings: out.warnings,
            note: None,
            seconds: self.record_timings.then(|| start.elapsed().as_secs_f64()),
        });
        Ok(())
    }

    pub fn skip_stage(&mut self, name: &str, note: String) {
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            status: StageStatus::Skipped,
            outputs: Vec::new(),
            warnings: Vec::new(),
            note: Some(note),
            seconds: None,
        });
    }

    pub fn write_manifest(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out)?;
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        std::fs::write(self.out.join("manifest.json"), s)?;
        Ok(())
    }

    fn weights(&self) -> CliResult<WeightConfig<f64>> {
        let t = &self.config.taste;
        Ok(WeightConfig::new(t.alpha, t.beta, t.lambda_spread)?)
    }
}

fn fmt_vec(v: &TasteVector<f64>) -> Vec<String> {
    v.components().iter().map(|x| x.to_string()).collect()
}

fn taste_header<'a>(lead: &[&'a str]) -> Vec<&'a str> {
    let mut h = lead.to_vec();
    h.extend(Taste::ALL.iter().map(|t| t.name()));
    h
}

struct FoodInputs {
    compounds: Vec<savor_core::taste::CompoundRecord<f64>>,
    nutrients: Vec<savor_core::taste::NutrientRecord<f64>>,
    foods: BTreeMap<String, String>,
}

fn food_inputs(run: &mut Run) -> CliResult<FoodInputs> {
    let inputs = run.config.inputs.clone();
    let foods = ingest::read_foods(&run.input("foods", inputs.foods)?)?;
    let compounds = match run.optional_input("compounds", inputs.compounds)? {
        Some(p) => ingest::read_compounds(&p)?,
        None => Vec::new(),
    };
    let mut nutrients = match run.optional_input("nutrients", inputs.nutrients)? {
        Some(p) => ingest::read_nutrients(&p)?,
        None => Vec::new(),
    };
    if let Some(p) = run.optional_input("nutrient_map", inputs.nutrient_map)? {
        savor_core::taste::apply_nutrient_map(&mut nutrients, &ingest::read_nutrient_map(&p)?);
    }
    if compounds.is_empty() && nutrients.is_empty() {
        return Err(CliError::validation("neither compounds nor nutrients are configured"));
    }
    Ok(FoodInputs { compounds, nutrients, foods })
}

/// Dish targets blended from food profiles, in dish id order.
fn dish_targets(run: &mut Run) -> CliResult<Vec<(String, TasteVector<f64>)>> {
    let Some(path) = run.optional_input("dishes", run.config.inputs.dishes.clone())? else {
        return Ok(Vec::new());
    };
    let dishes = ingest::read_dishes(&path)?;
    let inputs = food_inputs(run)?;
    let scheme = run.config.taste.normalization;
    let profiles = build_food_profiles(&inputs.compounds, &inputs.nutrients, &inputs.foods, &run.weights()?, scheme)?;
    let by_id: BTreeMap<&str, TasteVector<f64>> = profiles.iter().map(|p| (p.food_id.as_str(), p.vector)).collect();
    dishes
        .into_iter()
        .map(|(dish, foods)| {
            let vectors = foods
                .iter()
                .map(|f| {
                    by_id.get(f.as_str()).copied().ok_or_else(|| {
                        CliError::validation(format!("dish {dish} uses food {f}, which is not in the foods table"))
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok((dish, blend_dish(&vectors, scheme)?))
        })
        .collect()
}

pub fn taste_build(run: &mut Run) -> CliResult<StageOutput> {
    let inputs = food_inputs(run)?;
    let scheme = run.config.taste.normalization;
    let profiles = build_food_profiles(&inputs.compounds, &inputs.nutrients, &inputs.foods, &run.weights()?, scheme)?;
    let mut out = StageOutput::default();
    let rows: Vec<Vec<String>> = profiles
        .iter()
        .map(|p| {
            let mut r = vec![p.food_id.clone(), p.food_group.clone(), p.zero.to_string()];
            r.extend(fmt_vec(&p.vector));
            r
        })
        .collect();
    let zero = profiles.iter().filter(|p| p.zero).count();
    if zero > 0 {
        out.warnings.push(format!("{zero} foods have no taste signal and stay zero vectors"));
    }
    out.csv(run, "taste/food_profiles.csv", &taste_header(&["food_id", "food_group", "zero"]), &rows)?;
    let dishes = dish_targets(run)?;
    if !dishes.is_empty() {
        let rows: Vec<Vec<String>> = dishes
            .iter()
            .map(|(id, v)| {
                let mut r = vec![id.clone()];
                r.extend(fmt_vec(v));
                r
            })
            .collect();
        out.csv(run, "taste/dish_targets.csv", &taste_header(&["target_id"]), &rows)?;
    }
    Ok(out)
}

pub fn taste_sweep(run: &mut Run) -> CliResult<StageOutput> {
    let inputs = food_inputs(run)?;
    let t = &run.config.taste;
    let grid = t.grid.clone().unwrap_or_else(default_grid);
    let result =
        sweep_weights(&inputs.compounds, &inputs.nutrients, &inputs.foods, t.lambda_spread, &grid, t.normalization)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let rows: Vec<Vec<String>> = result
        .grid
        .iter()
        .map(|p| {
            vec![
                p.ratio.to_string(),
                opt(p.objective),
                opt(p.ch_index),
                opt(p.mean_spread),
                p.foods_scored.to_string(),
                p.zero_foods.to_string(),
                p.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut out = StageOutput::default();
    out.csv(
        run,
        "taste/sweep.csv",
        &["ratio", "objective", "ch_index", "mean_spread", "foods_scored", "zero_foods", "note"],
        &rows,
    )?;
    out.json(run, "taste/sweep.json", &result)?;
    Ok(out)
}

pub fn features_extract(run: &mut Run) -> CliResult<StageOutput> {
    let dir = run.input("audio_dir", run.config.inputs.audio_dir.clone())?;
    let audio = run.config.audio.clone();
    let stft = audio.stft();
    stft.validate()?;
    let manifest = match &audio.features {
        Some(keys) => {
            FeatureManifest::new(keys.iter().map(|k| k.parse::<FeatureKey>()).collect::<Result<Vec<_>, _>>()?)?
        }
        None => FeatureManifest::canonical(),
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::validation(format!("no .wav files in {}", dir.display())));
    }
    let mut rows = Vec::with_capacity(files.len());
    for f in &files {
        let ctx = |e: savor_core::Error| CliError::from(e).context(f.display());
        let mut seg = read_wav::<f64>(f).map_err(ctx)?;
        if let Some(rate) = audio.sample_rate_hz {
            if seg.sample_rate_hz() != rate {
                seg = seg.resample_linear(rate).map_err(ctx)?;
            }
        }
        let v = extract_features(&seg, &stft, &manifest).map_err(ctx)?;
        let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut row = vec![id];
        row.extend(v.values.iter().map(|x| x.to_string()));
        rows.push(row);
    }
    let names = manifest.column_names();
    let mut header = vec!["track_id"];
    header.extend(names.iter().map(String::as_str));
    let mut out = StageOutput::default();
    out.csv(run, "features/features.csv", &header, &rows)?;
    Ok(out)
}

#[derive(Serialize)]
struct MatchReport<'a> {
    d_max: f64,
    k: usize,
    mean_top_compatibility_pct: Option<f64>,
    outcomes: &'a [savor_core::matching::MatchOutcome<f64>],
}

pub fn match_stage(run: &mut Run) -> CliResult<StageOutput> {
    let corpus = match run.config.matching.corpus {
        MatchCorpus::Anchor => ingest::read_corpus(&run.input("corpus", run.config.inputs.corpus.clone())?)?,
        MatchCorpus::Other => ingest::read_corpus(&run.input("corpus_other", run.config.inputs.corpus_other.clone())?)?,
    };
    let mut targets = dish_targets(run)?;
    if let Some(p) = run.optional_input("targets", run.config.inputs.targets.clone())? {
        targets.extend(ingest::read_targets(&p)?);
    }
    if targets.is_empty() {
        return Err(CliError::validation("no match targets: configure inputs.dishes or inputs.targets"));
    }
    let cfg = MatchConfig {
        k: run.config.matching.k,
        d_max: run.config.matching.d_max(),
        metric: Metric::Euclidean,
        expected_scheme: Some(run.config.taste.normalization),
    };
    let outcomes = match_targets(&targets, &corpus, &cfg)?;
    let mean = mean_top_compatibility(&outcomes);
    let mut out = StageOutput::default();
    let mut rows = Vec::new();
    let mut table = format!("{:<28} {:<28} {:>10} {:>16}\n", "target", "top track", "distance", "compatibility %");
    for o in &outcomes {
        out.warnings.extend(o.warnings.iter().cloned());
        for (rank, r) in o.results.iter().enumerate() {
            rows.push(vec![
                r.target_id.clone(),
                (rank + 1).to_string(),
                r.track_id.clone(),
                r.distance.to_string(),
                r.compatibility_pct.to_string(),
            ]);
        }
        if let Some(r) = o.results.first() {
            let _ = writeln!(
                table,
                "{:<28} {:<28} {:>10.4} {:>16.1}",
                r.target_id, r.track_id, r.distance, r.compatibility_pct
            );
        }
    }
    if let Some(m) = mean {
        let _ = writeln!(table, "mean top-1 compatibility: {m:.1}%");
    }
    out.warnings.sort();
    out.warnings.dedup();
    out.csv(run, "match/matches.csv", &["target_id", "rank", "track_id", "distance", "compatibility_pct"], &rows)?;
    out.text(run, "match/table.txt", &table)?;
    let report = MatchReport { d_max: cfg.d_max, k: cfg.k, mean_top_compatibility_pct: mean, outcomes: &outcomes };
    out.json(run, "match/matches.json", &report)?;
    Ok(out)
}

pub fn stats_transfer(run: &mut Run) -> CliResult<StageOutput> {
    let anchor = ingest::read_corpus(&run.input("corpus", run.config.inputs.corpus.clone())?)?;
    let other = ingest::read_corpus(&run.input("corpus_other", run.config.inputs.corpus_other.clone())?)?;
    let t = &run.config.transfer;
    let report = transfer_report(&anchor, &other, (&t.anchor_label, &t.other_label), &t.core(), run.config.seed)?;
    let mut out = StageOutput::default();
    if report.features.len() < anchor.feature_names.len() || report.features.len() < other.feature_names.len() {
        out.warnings.push(format!("transfer uses the {} feature columns both corpora share", report.features.len()));
    }
    let mut rows = Vec::new();
    for f in &report.flavors {
        for (j, name) in report.features.iter().enumerate() {
            rows.push(vec![
                f.taste.name().to_string(),
                name.clone(),
                f.importance_anchor[j].to_string(),
                f.importance_other[j].to_string(),
            ]);
        }
    }
    out.text(run, "transfer/table.txt", &report.to_table())?;
    out.csv(run, "transfer/importances.csv", &["flavor", "feature", "importance_anchor", "importance_other"], &rows)?;
    out.json(run, "transfer/report.json", &report)?;
    Ok(out)
}

pub fn stats_perceptual(run: &mut Run) -> CliResult<StageOutput> {
    let stimuli = ingest::read_stimuli(&run.input("stimuli", run.config.inputs.stimuli.clone())?)?;
    let ratings = ingest::read_ratings(&run.input("ratings", run.config.inputs.ratings.clone())?)?;
    let report = alignment_report(&stimuli, &ratings, &run.config.perceptual, run.config.seed)?;
    let mut out = StageOutput { warnings: report.warnings.clone(), ..Default::default() };
    out.text(run, "perceptual/alignment.txt", &report.to_text())?;
    out.text(run, "perceptual/distance_matrix.csv", &report.distance_matrix.to_csv())?;
    out.json(run, "perceptual/alignment.json", &report)?;
    Ok(out)
}

pub fn stats_text(run: &mut Run) -> CliResult<StageOutput> {
    let corpus = ingest::read_corpus(&run.input("corpus", run.config.inputs.corpus.clone())?)?;
    let t = run.config.text.clone();
    let mut out = StageOutput::default();

    let genres = genre_tests(&corpus, t.adjustment, t.alpha)?;
    out.text(run, "text/genre_tests.txt", &genres.to_text())?;
    out.json(run, "text/genre_tests.json", &genres)?;

    let moods = mood_effects(&corpus, t.min_occurrences)?;
    if moods.moods.is_empty() {
        out.warnings.push(format!("no mood tag occurs at least {} times", t.min_occurrences));
    }
    let rows: Vec<Vec<String>> = moods
        .effects
        .iter()
        .map(|e| {
            vec![
                e.mood.clone(),
                e.flavor.name().to_string(),
                e.d.map(|d| d.to_string()).unwrap_or_default(),
                e.n_tagged.to_string(),
                e.n_untagged.to_string(),
            ]
        })
        .collect();
    out.csv(run, "text/mood_effects.csv", &["mood", "flavor", "cohens_d", "n_tagged", "n_untagged"], &rows)?;
    out.text(run, "text/mood_effects.txt", &moods.to_text(20))?;

    let matrix = genre_flavor_matrix(&corpus);
    out.text(run, "text/genre_flavor_matrix.csv", &matrix.to_csv())?;
    let rows: Vec<Vec<f64>> = matrix.means.iter().map(|m| m.to_vec()).collect();
    let tree = average_linkage(&rows)?;
    #[derive(Serialize)]
    struct Linkage<'a> {
        genres: &'a [String],
        leaf_order: Vec<&'a str>,
        merges: &'a [savor_core::text::Merge<f64>],
    }
    let linkage = Linkage {
        genres: &matrix.genres,
        leaf_order: tree.leaf_order.iter().map(|&i| matrix.genres[i].as_str()).collect(),
        merges: &tree.merges,
    };
    out.json(run, "text/genre_linkage.json", &linkage)?;

    let clusters = cluster_texts(&corpus.texts, &t.clusters, run.config.seed)?;
    out.text(run, "text/clusters.txt", &clusters.to_text())?;
    out.json(run, "text/clusters.json", &clusters)?;
    Ok(out)
}

/// Stages in `report all` order with the inputs each one needs.
pub fn all_stages(cfg: &RunConfig) -> Vec<StagePlan> {
    let i = &cfg.inputs;
    let food = i.foods.is_some() && (i.compounds.is_some() || i.nutrients.is_some());
    vec![
        ("taste build", taste_build as Stage, vec![("foods + compounds/nutrients", food)]),
        ("taste sweep", taste_sweep, vec![("foods + compounds/nutrients", food)]),
        ("features extract", features_extract, vec![("audio_dir", i.audio_dir.is_some())]),
        (
            "match",
            match_stage,
            vec![
                match cfg.matching.corpus {
                    MatchCorpus::Anchor => ("corpus", i.corpus.is_some()),
                    MatchCorpus::Other => ("corpus_other", i.corpus_other.is_some()),
                },
                ("dishes or targets", i.dishes.is_some() || i.targets.is_some()),
            ],
        ),
        (
            "stats transfer",
            stats_transfer,
            vec![("corpus", i.corpus.is_some()), ("corpus_other", i.corpus_other.is_some())],
        ),
        (
            "stats perceptual",
            stats_perceptual,
            vec![("stimuli", i.stimuli.is_some()), ("ratings", i.ratings.is_some())],
        ),
        ("stats text", stats_text, vec![("corpus", i.corpus.is_some())]),
    ]
}

pub fn out_dir(cli_out: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli_out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("savor-out"))
}
