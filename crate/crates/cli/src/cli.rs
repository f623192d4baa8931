use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::CONFIG_ENV;

#[derive(Debug, Parser)]
#[command(name = "savor", version, about = "Taste vectors, music matching and cross-modal statistics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Master seed for every randomized procedure
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Permutations for every perceptual test
    #[arg(long, global = true)]
    pub n_perm: Option<usize>,
    /// Distance at which compatibility reaches 0
    #[arg(long, global = true)]
    pub d_max: Option<f64>,
    /// Taste-vector normalization
    #[arg(long, global = true, value_parser = ["l1", "l2", "max"])]
    pub normalization: Option<String>,
    /// Row cap for forest iterations and parallel analysis
    #[arg(long, global = true)]
    pub subsample: Option<usize>,
    /// Store per-stage wall-clock time in the run manifest
    #[arg(long, global = true)]
    pub record_timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Food taste profiles
    #[command(subcommand)]
    Taste(TasteCommand),
    /// Audio descriptors
    #[command(subcommand)]
    Features(FeaturesCommand),
    /// Rank corpus tracks against taste targets
    Match,
    /// Statistical analyses
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Run every stage whose inputs are configured
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Subcommand)]
pub enum TasteCommand {
    /// Build food profiles and dish targets
    Build,
    /// Sweep the compound/nutrient weight ratio
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCommand {
    /// Extract mean/std descriptors from a directory of WAV files
    Extract {
        /// Audio directory; overrides the configured one
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Correlation and importance transfer between two corpora
    Transfer,
    /// Agreement between taste targets and listener ratings
    Perceptual,
    /// Genre, mood and caption probes
    Text,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// All stages
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Taste(TasteCommand::Build) => "taste build",
            Command::Taste(TasteCommand::Sweep) => "taste sweep",
            Command::Features(_) => "features extract",
            Command::Match => "match",
            Command::Stats(StatsCommand::Transfer) => "stats transfer",
            Command::Stats(StatsCommand::Perceptual) => "stats perceptual",
            Command::Stats(StatsCommand::Text) => "stats text",
            Command::Report(ReportCommand::All) => "report all",
        }
    }
}
