use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dsp::PreprocessConfig;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::segmentation::SegmentationParams;
use crate::ssl::AgreementScheme;
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    /// Directory holding `<uuid>.wav` for every metadata row.
    pub audio_dir: PathBuf,
    pub metadata: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    pub min_cough_score: f64,
    pub min_snr_db: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            min_cough_score: 0.8,
            min_snr_db: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenderParams {
    /// TPE trials per model kind for the gender model.
    pub budget: usize,
}

impl Default for GenderParams {
    fn default() -> Self {
        GenderParams { budget: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SslParams {
    pub scheme: AgreementScheme,
    /// Recordings an annotator needs in each class to get a model.
    pub min_per_class: usize,
    /// Share of recordings held out for testing.
    pub test_frac: f64,
    pub split_seed: u64,
    /// Annotator ids to use; empty means every `expert_<id>` column.
    pub annotators: Vec<String>,
}

impl Default for SslParams {
    fn default() -> Self {
        SslParams {
            scheme: AgreementScheme::Majority,
            min_per_class: 10,
            test_frac: 0.2,
            split_seed: 1,
            annotators: Vec::new(),
        }
    }
}

/// Everything one pipeline run depends on, loaded from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub filter: FilterParams,
    #[serde(default)]
    pub gender: GenderParams,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub ssl: SslParams,
}

impl PipelineConfig {
    pub fn new(audio_dir: impl Into<PathBuf>, metadata: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            paths: Paths {
                audio_dir: audio_dir.into(),
                metadata: metadata.into(),
                output_dir: output_dir.into(),
            },
            preprocess: PreprocessConfig::default(),
            segmentation: SegmentationParams::default(),
            features: FeatureConfig::default(),
            filter: FilterParams::default(),
            gender: GenderParams::default(),
            training: TrainConfig::default(),
            ssl: SslParams::default(),
        }
    }

    /// Parses a TOML file. Relative paths are taken relative to the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.paths.audio_dir, &mut cfg.paths.metadata, &mut cfg.paths.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.paths.audio_dir.is_dir() {
            return Err(Error::Config(format!("audio_dir {} is not a directory", self.paths.audio_dir.display())));
        }
        if !self.paths.metadata.is_file() {
            return Err(Error::Config(format!("metadata {} does not exist", self.paths.metadata.display())));
        }
        let as_config = |e: Error| Error::Config(e.to_string());
        self.segmentation.validate().map_err(as_config)?;
        self.features.validate(self.preprocess.target_rate as f64).map_err(as_config)?;
        self.training.validate()?;
        if self.preprocess.filter_order == 0 || self.preprocess.target_rate == 0 || self.preprocess.cutoff_hz <= 0.0 {
            return Err(Error::Config("preprocess order, cutoff and target rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.filter.min_cough_score) {
            return Err(Error::Config("min_cough_score must lie in [0, 1]".into()));
        }
        if !(self.ssl.test_frac > 0.0 && self.ssl.test_frac < 1.0) {
            return Err(Error::Config(format!("test_frac must be in (0, 1), got {}", self.ssl.test_frac)));
        }
        if self.ssl.min_per_class == 0 || self.gender.budget == 0 {
            return Err(Error::Config("min_per_class and gender budget must be positive".into()));
        }
        Ok(())
    }

    /// Hash of the settings a stage depends on, including all upstream ones.
    pub fn stage_hash(&self, stage: super::Stage) -> String {
        use super::Stage::*;
        let mut parts: Vec<serde_json::Value> = vec![serde_json::to_value(&self.preprocess).unwrap()];
        let idx = stage as usize;
        if idx >= Segment as usize {
            parts.push(serde_json::to_value(&self.segmentation).unwrap());
        }
        if idx >= Features as usize {
            parts.push(serde_json::to_value(&self.features).unwrap());
            parts.push(serde_json::to_value(self.filter).unwrap());
            parts.push(serde_json::to_value(self.gender).unwrap());
            parts.push(serde_json::to_value(&self.training).unwrap());
        }
        if idx >= TrainExperts as usize {
            parts.push(serde_json::to_value(&self.ssl).unwrap());
        }
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&parts).unwrap());
        hex::encode(h.finalize())
    }
}
