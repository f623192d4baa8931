use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use savor_cli::ingest::{read_corpus, read_ratings, write_corpus};
use tempfile::TempDir;

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy")
}

fn savor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_savor")).args(args).env_remove("SAVOR_CONFIG").output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = savor(args);
    assert!(out.status.success(), "savor {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn config() -> String {
    toy().join("config.toml").display().to_string()
}

#[test]
fn report_all_twice_gives_identical_trees() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        run_ok(&["--config", &config(), "--out", d.path().to_str().unwrap(), "report", "all"]);
    }
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{} differs between runs", k.display());
    }
    for f in [
        "manifest.json",
        "taste/food_profiles.csv",
        "taste/dish_targets.csv",
        "taste/sweep.csv",
        "taste/sweep.json",
        "features/features.csv",
        "match/matches.csv",
        "match/table.txt",
        "match/matches.json",
        "transfer/report.json",
        "transfer/table.txt",
        "transfer/importances.csv",
        "perceptual/alignment.json",
        "perceptual/alignment.txt",
        "perceptual/distance_matrix.csv",
        "text/genre_tests.json",
        "text/genre_tests.txt",
        "text/mood_effects.csv",
        "text/mood_effects.txt",
        "text/clusters.json",
        "text/clusters.txt",
        "text/genre_flavor_matrix.csv",
        "text/genre_linkage.json",
    ] {
        assert!(ta.contains_key(Path::new(f)), "missing {f}");
    }
}

#[test]
fn different_seed_changes_randomized_outputs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run_ok(&["--config", &config(), "--out", a.path().to_str().unwrap(), "--seed", "1", "stats", "perceptual"]);
    run_ok(&["--config", &config(), "--out", b.path().to_str().unwrap(), "--seed", "2", "stats", "perceptual"]);
    let f = Path::new("perceptual/alignment.json");
    assert_ne!(tree(a.path())[f], tree(b.path())[f]);
}

#[test]
fn perceptual_with_seed_7_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        run_ok(&["--config", &config(), "--out", d.path().to_str().unwrap(), "--seed", "7", "stats", "perceptual"]);
    }
    assert_eq!(tree(a.path()), tree(b.path()));
}

#[test]
fn manifest_records_digests_and_seed() {
    let d = TempDir::new().unwrap();
    run_ok(&["--config", &config(), "--out", d.path().to_str().unwrap(), "--seed", "11", "match"]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
    assert_eq!(m["command"], "match");
    let inputs = m["inputs"].as_array().unwrap();
    assert!(inputs.iter().any(|i| i["role"] == "corpus" && i["sha256"].as_str().unwrap().len() == 64));
    assert!(m["stages"][0].get("seconds").is_none());
}

#[test]
fn record_timings_adds_stage_seconds() {
    let d = TempDir::new().unwrap();
    run_ok(&["--config", &config(), "--out", d.path().to_str().unwrap(), "--record-timings", "taste", "build"]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("manifest.json")).unwrap()).unwrap();
    assert!(m["stages"][0]["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_from_environment() {
    let d = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_savor"))
        .args(["--out", d.path().to_str().unwrap(), "taste", "sweep"])
        .env("SAVOR_CONFIG", config())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = std::fs::read_to_string(d.path().join("taste/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 17);
}

#[test]
fn features_extract_takes_input_directory() {
    let d = TempDir::new().unwrap();
    let audio = toy().join("audio");
    run_ok(&["--out", d.path().to_str().unwrap(), "features", "extract", "--input", audio.to_str().unwrap()]);
    let csv = std::fs::read_to_string(d.path().join("features/features.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].split(',').count(), 1 + 92);
    assert!(lines[3].starts_with("tone_a440,"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = savor(&["--no-such-flag", "report", "all"]);
    assert_eq!(out.status.code(), Some(2));
    let out = savor(&["--normalization", "l3", "match"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2() {
    let d = TempDir::new().unwrap();
    let out = savor(&["--out", d.path().to_str().unwrap(), "match"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus"));

    let bad = d.path().join("bad.toml");
    std::fs::write(&bad, "seeed = 4\n").unwrap();
    let out = savor(&["--config", bad.to_str().unwrap(), "report", "all"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_input_exits_3() {
    let d = TempDir::new().unwrap();
    let stimuli = d.path().join("stimuli.csv");
    let mut text = String::from("target_id,track_id,sweet,bitter,sour,salty,spicy\n");
    for i in 0..8 {
        text.push_str(&format!("t{i},stim_{i},0.2,0.2,0.2,0.2,0.2\n"));
    }
    std::fs::write(&stimuli, text).unwrap();
    let cfg = d.path().join("config.toml");
    std::fs::write(
        &cfg,
        format!(
            "[inputs]\nstimuli = \"stimuli.csv\"\nratings = \"{}\"\n[perceptual]\nstandardize_targets = false\n",
            toy().join("ratings.csv").display()
        ),
    )
    .unwrap();
    let out = savor(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d.path().join("o").to_str().unwrap(),
        "--n-perm",
        "200",
        "stats",
        "perceptual",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn err(r: Result<impl std::fmt::Debug, savor_cli::error::CliError>) -> String {
    r.unwrap_err().to_string()
}

#[test]
fn empty_corpus_is_rejected() {
    let d = TempDir::new().unwrap();
    let e = err(read_corpus(&write(&d, "empty.csv", "")));
    assert!(e.contains("empty"), "{e}");
    let e = err(read_corpus(&write(&d, "header.csv", "id,sweet,bitter,sour,salty,spicy,zcr_mean\n")));
    assert!(e.contains("no data rows"), "{e}");
}

#[test]
fn malformed_row_names_line_and_column() {
    let d = TempDir::new().unwrap();
    let p = write(
        &d,
        "c.csv",
        "id,sweet,bitter,sour,salty,spicy,zcr_mean\nx,0.2,0.2,0.2,0.2,0.2,0.1\ny,0.2,abc,0.2,0.2,0.2,0.1\n",
    );
    let e = err(read_corpus(&p));
    assert!(e.contains(":3:") && e.contains("'bitter'"), "{e}");
    let p = write(&d, "n.csv", "id,sweet,bitter,sour,salty,spicy,zcr_mean\nx,0.2,0.2,0.2,0.2,0.2,NaN\n");
    let e = err(read_corpus(&p));
    assert!(e.contains(":2:") && e.contains("'zcr_mean'"), "{e}");
    let p = write(&d, "neg.csv", "id,sweet,bitter,sour,salty,spicy,zcr_mean\nx,-0.2,0.2,0.2,0.2,0.2,1\n");
    assert!(err(read_corpus(&p)).contains("'sweet'"));
}

#[test]
fn missing_column_duplicate_id_and_manifest_mismatch() {
    let d = TempDir::new().unwrap();
    let e = err(read_corpus(&write(&d, "a.csv", "id,sweet,bitter,sour,salty,zcr_mean\nx,1,1,1,1,1\n")));
    assert!(e.contains("missing required column 'spicy'"), "{e}");
    let e = err(read_corpus(&write(
        &d,
        "b.csv",
        "id,sweet,bitter,sour,salty,spicy,zcr_mean\nx,1,1,1,1,1,1\nx,1,1,1,1,1,1\n",
    )));
    assert!(e.contains("duplicate"), "{e}");
    let e = err(read_corpus(&write(&d, "c.csv", "id,sweet,bitter,sour,salty,spicy,tempo_mean\nx,1,1,1,1,1,1\n")));
    assert!(e.contains("manifest mismatch") && e.contains("tempo_mean"), "{e}");
    let e = err(read_corpus(&write(&d, "d.csv", "id,sweet,bitter,sour,salty,spicy,mfcc_40_mean\nx,1,1,1,1,1,1\n")));
    assert!(e.contains("manifest mismatch"), "{e}");
}

#[test]
fn ratings_outside_scale_are_rejected() {
    let d = TempDir::new().unwrap();
    let p = write(
        &d,
        "r.csv",
        "subject_id,track_id,sweet,bitter,sour,salty,spicy,hearing_impairment,taste_smell_impairment\ns,t,1,2,3,8,5,no,no\n",
    );
    let e = err(read_ratings(&p));
    assert!(e.contains(":2:") && e.contains("'salty'"), "{e}");
}

#[test]
fn corpus_write_read_round_trip() {
    let corpus = read_corpus(&toy().join("corpus_a.csv")).unwrap();
    let d = TempDir::new().unwrap();
    let p = d.path().join("copy.csv");
    write_corpus(&p, &corpus).unwrap();
    let back = read_corpus(&p).unwrap();
    assert_eq!(back, corpus);
    let q = d.path().join("copy2.csv");
    write_corpus(&q, &back).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
}
