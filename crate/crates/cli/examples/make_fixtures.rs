//! Writes the toy fixture bundle used by the integration tests and the
//! README walkthrough.
//!
//! ```text
//! cargo run -p savor-cli --example make_fixtures -- fixtures/toy
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use savor_cli::ingest::{write_corpus, write_rows};
use savor_core::audio::{write_wav_i16, AudioSegment, FeatureManifest};
use savor_core::corpus::CorpusTable;
use savor_core::rng::{stream, StreamRng};

const SEED: u64 = 20_240_601;

const GROUPS: [(&str, [f64; 6]); 4] = [
    ("fruit", [0.8, 0.05, 0.4, 0.02, 0.02, 0.02]),
    ("vegetable", [0.15, 0.6, 0.15, 0.1, 0.1, 0.2]),
    ("meat", [0.05, 0.1, 0.05, 0.5, 0.1, 0.7]),
    ("spice", [0.05, 0.3, 0.1, 0.2, 0.85, 0.05]),
];

const NUTRIENTS: [(&str, &str); 4] =
    [("sugars", "sweet"), ("sodium", "salty"), ("citric_acid", "sour"), ("glutamate", "umami")];

const GENRES: [(&str, [f64; 5], &[&str]); 4] = [
    ("pop", [1.2, -0.4, 0.2, 0.0, -0.3], &["love", "dance", "baby", "night", "heart", "radio"]),
    ("rock", [-0.3, 0.6, 0.0, 0.3, 0.5], &["guitar", "loud", "road", "fire", "drum", "rebel"]),
    ("jazz", [0.2, 0.5, 0.6, -0.2, -0.2], &["swing", "smoky", "brass", "blue", "club", "saxophone"]),
    ("classical", [0.4, 0.2, -0.3, -0.4, -0.6], &["strings", "sonata", "orchestra", "piano", "adagio", "hall"]),
];

const MOODS: [&str; 6] = ["happy", "sad", "calm", "energetic", "dark", "romantic"];
const COMMON: [&str; 8] = ["song", "music", "sound", "track", "feel", "time", "beat", "voice"];

fn normal(rng: &mut StreamRng) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sample(rng)
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

fn foods(dir: &Path, rng: &mut StreamRng) -> Vec<String> {
    let mut food_rows = Vec::new();
    let mut compound_rows = Vec::new();
    let mut nutrient_rows = Vec::new();
    let mut ids = Vec::new();
    for (g, (group, tilt)) in GROUPS.iter().enumerate() {
        for i in 0..8 {
            let food = format!("{group}_{i:02}");
            food_rows.push(vec![food.clone(), group.to_string()]);
            for c in 0..rng.random_range(3..7) {
                let probs: Vec<String> = tilt.iter().map(|p| fmt((p + 0.15 * normal(rng)).clamp(0.0, 1.0))).collect();
                let mut row =
                    vec![food.clone(), format!("c{:03}", g * 40 + c * 5 + i % 5), fmt(rng.random_range(0.5..400.0))];
                row.extend(probs);
                compound_rows.push(row);
            }
            for (n, (nutrient, _)) in NUTRIENTS.iter().enumerate() {
                let base = tilt[[0, 3, 2, 5][n]];
                if rng.random::<f64>() < 0.2 + base {
                    nutrient_rows.push(vec![
                        food.clone(),
                        nutrient.to_string(),
                        fmt(base * rng.random_range(0.5..30.0)),
                    ]);
                }
            }
            ids.push(food);
        }
    }
    // One food with no measured signal at all stays a zero vector.
    food_rows.push(vec!["water".into(), "beverage".into()]);
    nutrient_rows.push(vec!["water".into(), "sugars".into(), "0".into()]);

    write_rows(&dir.join("foods.csv"), &["food_id", "food_group"], &food_rows).unwrap();
    write_rows(
        &dir.join("compounds.csv"),
        &["food_id", "compound_id", "concentration_mg_per_100g", "sweet", "bitter", "sour", "salty", "spicy", "umami"],
        &compound_rows,
    )
    .unwrap();
    write_rows(&dir.join("nutrients.csv"), &["food_id", "nutrient_id", "amount"], &nutrient_rows).unwrap();
    let map: Vec<Vec<String>> = NUTRIENTS.iter().map(|(n, t)| vec![n.to_string(), t.to_string()]).collect();
    write_rows(&dir.join("nutrient_map.csv"), &["nutrient_id", "taste"], &map).unwrap();
    ids
}

fn dishes(dir: &Path, foods: &[String], rng: &mut StreamRng) {
    let names = ["fruit_salad", "pepper_steak", "herb_soup", "spiced_stew", "sweet_sour_pork", "green_curry"];
    let mut rows = Vec::new();
    for name in names {
        let n = rng.random_range(2..5);
        for f in foods.choose_multiple(rng, n) {
            rows.push(vec![name.to_string(), f.clone()]);
        }
    }
    write_rows(&dir.join("dishes.csv"), &["dish_id", "food_id"], &rows).unwrap();
}

/// Features follow a three-factor model; flavors load on a few features
/// with the same signs in both corpora.
fn corpus(n: usize, prefix: &str, rng: &mut StreamRng, with_text: bool) -> CorpusTable<f64> {
    let names = FeatureManifest::canonical().column_names();
    let p = names.len();
    let loadings: Vec<[f64; 3]> = (0..p)
        .map(|j| {
            let t = j as f64;
            [(1.3 * t).cos(), (0.7 * t + 1.0).sin(), (2.1 * t + 0.4).cos()]
        })
        .collect();
    let mut features = DMatrix::zeros(n, p);
    let mut flavors = DMatrix::zeros(n, 5);
    let mut ids = Vec::with_capacity(n);
    let mut genres = Vec::with_capacity(n);
    let mut moods = Vec::with_capacity(n);
    let mut texts = Vec::with_capacity(n);
    for r in 0..n {
        let g = r % GENRES.len();
        let (genre, shift, words) = GENRES[g];
        let z = [normal(rng) + shift[0], normal(rng) + shift[1], normal(rng)];
        for j in 0..p {
            let signal: f64 = loadings[j].iter().zip(&z).map(|(l, z)| l * z).sum();
            features[(r, j)] = signal + 0.5 * normal(rng);
        }
        let mut raw = [0.0; 5];
        for (t, slot) in raw.iter_mut().enumerate() {
            let drive = 0.8 * features[(r, 2 * t)] - 0.5 * features[(r, 2 * t + 11)] + shift[t] + 0.3 * normal(rng);
            *slot = (1.0 + drive.exp()).ln();
        }
        let total: f64 = raw.iter().sum();
        for t in 0..5 {
            flavors[(r, t)] = raw[t] / total;
        }
        ids.push(format!("{prefix}{r:04}"));
        genres.push(Some(genre.to_string()));
        let mut m = BTreeSet::new();
        m.insert(MOODS[(g + r / 7) % MOODS.len()].to_string());
        if rng.random::<f64>() < 0.4 {
            m.insert(MOODS.choose(rng).unwrap().to_string());
        }
        moods.push(m);
        if with_text {
            let mut text: Vec<&str> = (0..6).map(|_| *words.choose(rng).unwrap()).collect();
            text.extend((0..3).map(|_| *COMMON.choose(rng).unwrap()));
            texts.push(text.join(" "));
        } else {
            texts.push(String::new());
        }
    }
    CorpusTable::new(ids, names, features, flavors).unwrap().with_metadata(genres, moods, texts).unwrap()
}

fn perceptual(dir: &Path, rng: &mut StreamRng) {
    let tracks = 8;
    let mut stimuli = Vec::new();
    let mut targets = Vec::new();
    for i in 0..tracks {
        let mut v = [0.05; 5];
        v[i % 5] += 0.6;
        v[(i * 3 + 1) % 5] += 0.25 * (i as f64 / tracks as f64);
        let total: f64 = v.iter().sum();
        let v: Vec<f64> = v.iter().map(|x| x / total).collect();
        let mut row = vec![format!("target_{i}"), format!("stim_{i}")];
        row.extend(v.iter().map(|&x| fmt(x)));
        stimuli.push(row);
        targets.push(v);
    }
    let mut ratings = Vec::new();
    for s in 0..10 {
        for (i, target) in targets.iter().enumerate() {
            let mut row = vec![format!("s{s:02}"), format!("stim_{i}")];
            for &x in target {
                let r = (1.5 + 7.0 * x + 0.9 * normal(rng)).round().clamp(1.0, 7.0);
                row.push((r as u8).to_string());
            }
            row.push(if s % 2 == 0 { "headphones" } else { "speakers" }.into());
            row.push((s == 9).to_string());
            row.push("false".into());
            ratings.push(row);
        }
    }
    let tastes = ["sweet", "bitter", "sour", "salty", "spicy"];
    let mut header = vec!["target_id", "track_id"];
    header.extend(tastes);
    write_rows(&dir.join("stimuli.csv"), &header, &stimuli).unwrap();
    let mut header = vec!["subject_id", "track_id"];
    header.extend(tastes);
    header.extend(["device", "hearing_impairment", "taste_smell_impairment"]);
    write_rows(&dir.join("ratings.csv"), &header, &ratings).unwrap();
}

fn audio(dir: &Path, rng: &mut StreamRng) {
    let audio = dir.join("audio");
    std::fs::create_dir_all(&audio).unwrap();
    let clips: [(&str, u32, f64); 3] =
        [("tone_a440", 22050, 440.0), ("chord_c", 22050, 261.63), ("noisy_16k", 16000, 1000.0)];
    for (name, sr, f) in clips {
        let n = sr as usize;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / sr as f64;
                let mut x = 0.4 * (2.0 * PI * f * t).sin();
                if name == "chord_c" {
                    x += 0.2 * (2.0 * PI * f * 1.26 * t).sin() + 0.2 * (2.0 * PI * f * 1.5 * t).sin();
                }
                if name == "noisy_16k" {
                    x += 0.1 * normal(rng);
                }
                x.clamp(-1.0, 1.0)
            })
            .collect();
        write_wav_i16(audio.join(format!("{name}.wav")), &AudioSegment::new(samples, sr).unwrap()).unwrap();
    }
}

const CONFIG: &str = r#"seed = 7
out = "out"

[inputs]
compounds = "compounds.csv"
nutrients = "nutrients.csv"
nutrient_map = "nutrient_map.csv"
foods = "foods.csv"
dishes = "dishes.csv"
corpus = "corpus_a.csv"
corpus_other = "corpus_b.csv"
audio_dir = "audio"
stimuli = "stimuli.csv"
ratings = "ratings.csv"

[matching]
k = 3

[transfer]
anchor_label = "corpus_a"
other_label = "corpus_b"
pa_reps = 200

[transfer.forest]
n_boot = 5
n_trees = 10
max_depth = 8

[perceptual]
n_perm_alignment = 999
n_perm_mantel = 999
n_perm_procrustes = 999

[text]
min_occurrences = 10

[text.clusters]
top_terms = 5

[text.clusters.kmeans]
k = 4
n_init = 4
"#;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/toy".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = stream(SEED, "fixtures");
    let food_ids = foods(&dir, &mut rng);
    dishes(&dir, &food_ids, &mut rng);
    write_corpus(&dir.join("corpus_a.csv"), &corpus(120, "a", &mut rng, true)).unwrap();
    write_corpus(&dir.join("corpus_b.csv"), &corpus(100, "b", &mut rng, false)).unwrap();
    perceptual(&dir, &mut rng);
    audio(&dir, &mut rng);
    std::fs::write(dir.join("config.toml"), CONFIG).unwrap();
    println!("wrote fixtures to {}", dir.display());
}
