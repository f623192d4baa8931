//! Command-line pipeline around `savor_core`: CSV ingestion, TOML run
//! configuration, stage orchestration and report emission.
//!
//! Every invocation writes a `manifest.json` next to its outputs recording
//! the effective configuration, the SHA-256 digest of every input and the
//! stages that ran. Identical inputs, configuration and seed give
//! byte-identical output trees.

pub mod cli;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod pipeline;

use savor_core::taste::NormalizationScheme;

use crate::cli::{Cli, Command, FeaturesCommand, GlobalArgs, StatsCommand, TasteCommand};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::Run;

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(args: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.n_perm {
        cfg.perceptual.n_perm_alignment = n;
        cfg.perceptual.n_perm_mantel = n;
        cfg.perceptual.n_perm_procrustes = n;
    }
    if let Some(d) = args.d_max {
        cfg.matching.d_max = Some(d);
    }
    if let Some(n) = &args.normalization {
        cfg.taste.normalization = n.parse::<NormalizationScheme>()?;
    }
    if let Some(n) = args.subsample {
        cfg.transfer.forest.subsample = Some(n);
        cfg.transfer.pa_max_rows = Some(n);
    }
    Ok(cfg)
}

/// Runs one command and returns the list of files it wrote, relative to
/// the output directory.
pub fn run(cli: &Cli) -> CliResult<Vec<String>> {
    let mut cfg = resolve_config(&cli.global)?;
    let out = pipeline::out_dir(cli.global.out.as_deref(), &cfg);
    if let Command::Features(FeaturesCommand::Extract { input: Some(dir) }) = &cli.command {
        cfg.inputs.audio_dir = Some(dir.clone());
    }
    let mut run = Run::new(cli.command.name(), cfg, out, cli.global.record_timings);
    let single: Option<pipeline::Stage> = match &cli.command {
        Command::Taste(TasteCommand::Build) => Some(pipeline::taste_build),
        Command::Taste(TasteCommand::Sweep) => Some(pipeline::taste_sweep),
        Command::Features(_) => Some(pipeline::features_extract),
        Command::Match => Some(pipeline::match_stage),
        Command::Stats(StatsCommand::Transfer) => Some(pipeline::stats_transfer),
        Command::Stats(StatsCommand::Perceptual) => Some(pipeline::stats_perceptual),
        Command::Stats(StatsCommand::Text) => Some(pipeline::stats_text),
        Command::Report(_) => None,
    };
    match single {
        Some(stage) => run.run_stage(cli.command.name(), stage)?,
        None => {
            for (name, stage, needs) in pipeline::all_stages(&run.config) {
                let missing: Vec<&str> = needs.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
                if missing.is_empty() {
                    run.run_stage(name, stage)?;
                } else {
                    run.skip_stage(name, format!("missing input: {}", missing.join(", ")));
                }
            }
            if run.manifest.stages.iter().all(|s| s.outputs.is_empty()) {
                return Err(CliError::validation("no stage has its inputs configured"));
            }
        }
    }
    run.write_manifest()?;
    let mut files: Vec<String> = run.manifest.stages.iter().flat_map(|s| s.outputs.iter().cloned()).collect();
    files.push("manifest.json".into());
    Ok(files)
}
