//! Run configuration, read from TOML. Every field has a default, so an
//! empty file is a valid configuration; input paths are resolved relative
//! to the directory holding the config file.

use std::path::{Path, PathBuf};

use savor_core::audio::{StftConfig, Window};
use savor_core::perceptual::AlignmentConfig;
use savor_core::taste::NormalizationScheme;
use savor_core::text::{Adjustment, TextClusterConfig};
use savor_core::transfer::{ForestConfig, TransferConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the config file used when `--config` is
/// absent.
pub const CONFIG_ENV: &str = "SAVOR_CONFIG";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub compounds: Option<PathBuf>,
    pub nutrients: Option<PathBuf>,
    pub nutrient_map: Option<PathBuf>,
    pub foods: Option<PathBuf>,
    /// `dish_id,food_id` rows; dishes become match targets.
    pub dishes: Option<PathBuf>,
    /// `target_id,sweet,...` rows of ready-made targets.
    pub targets: Option<PathBuf>,
    /// Anchor corpus (strong supervision); also the text-probe corpus.
    pub corpus: Option<PathBuf>,
    pub corpus_other: Option<PathBuf>,
    pub audio_dir: Option<PathBuf>,
    pub stimuli: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
}

impl Inputs {
    fn resolve(&mut self, base: &Path) {
        for path in [
            &mut self.compounds,
            &mut self.nutrients,
            &mut self.nutrient_map,
            &mut self.foods,
            &mut self.dishes,
            &mut self.targets,
            &mut self.corpus,
            &mut self.corpus_other,
            &mut self.audio_dir,
            &mut self.stimuli,
            &mut self.ratings,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TasteSection {
    pub normalization: NormalizationScheme,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_spread: f64,
    /// Sweep ratios; defaults to 0.0, 0.2, ..., 3.0.
    pub grid: Option<Vec<f64>>,
}

impl Default for TasteSection {
    fn default() -> Self {
        Self { normalization: NormalizationScheme::L1, alpha: 0.4, beta: 1.0, lambda_spread: 10.0, grid: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioSection {
    pub frame_length: usize,
    pub hop_length: usize,
    pub window: Window,
    /// Files at other rates are resampled to this rate.
    pub sample_rate_hz: Option<u32>,
    /// Feature keys such as `mfcc_3`; defaults to the canonical 46.
    pub features: Option<Vec<String>>,
}

impl Default for AudioSection {
    fn default() -> Self {
        let stft = StftConfig::default();
        Self {
            frame_length: stft.frame_length,
            hop_length: stft.hop_length,
            window: stft.window,
            sample_rate_hz: Some(22050),
            features: None,
        }
    }
}

impl AudioSection {
    pub fn stft(&self) -> StftConfig {
        StftConfig { frame_length: self.frame_length, hop_length: self.hop_length, window: self.window }
    }
}

/// Corpus that `match` ranks tracks from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchCorpus {
    #[default]
    Anchor,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSection {
    pub corpus: MatchCorpus,
    pub k: usize,
    /// Distance at which compatibility reaches 0; defaults to sqrt(5).
    pub d_max: Option<f64>,
}

impl Default for MatchingSection {
    fn default() -> Self {
        Self { corpus: MatchCorpus::Anchor, k: 5, d_max: None }
    }
}

impl MatchingSection {
    pub fn d_max(&self) -> f64 {
        self.d_max.unwrap_or_else(|| 5f64.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferSection {
    pub anchor_label: String,
    pub other_label: String,
    pub top_k: usize,
    pub forest: ForestConfig,
    pub pa_reps: usize,
    pub pa_percentile: f64,
    pub pa_max_rows: Option<usize>,
}

impl Default for TransferSection {
    fn default() -> Self {
        let t = TransferConfig::default();
        Self {
            anchor_label: "anchor".into(),
            other_label: "other".into(),
            top_k: t.top_k,
            forest: t.forest,
            pa_reps: t.pa_reps,
            pa_percentile: t.pa_percentile,
            pa_max_rows: t.pa_max_rows,
        }
    }
}

impl TransferSection {
    pub fn core(&self) -> TransferConfig {
        TransferConfig {
            top_k: self.top_k,
            forest: self.forest,
            pa_reps: self.pa_reps,
            pa_percentile: self.pa_percentile,
            pa_max_rows: self.pa_max_rows,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextSection {
    pub min_occurrences: usize,
    pub alpha: f64,
    pub adjustment: Adjustment,
    pub clusters: TextClusterConfig,
}

impl Default for TextSection {
    fn default() -> Self {
        Self {
            min_occurrences: 100,
            alpha: 0.05,
            adjustment: Adjustment::Bonferroni,
            clusters: TextClusterConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub inputs: Inputs,
    pub taste: TasteSection,
    pub audio: AudioSection,
    pub matching: MatchingSection,
    pub transfer: TransferSection,
    pub perceptual: AlignmentConfig,
    pub text: TextSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))
    }

    /// Reads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.inputs.resolve(base);
        if let Some(out) = &cfg.out {
            if out.is_relative() {
                cfg.out = Some(base.join(out));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
