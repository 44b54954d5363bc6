//! Corpus types and their on-disk formats.
//!
//! Metadata and relabeled output are comma-separated UTF-8 tables with a
//! header row. Audio is RIFF/WAV PCM; see [`wav`].

mod labels;
mod metadata;
pub mod wav;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use labels::{read_labels, write_labels};
pub use metadata::{filter_corpus, load_metadata, write_metadata};
pub use wav::{load_audio, write_wav_f32, write_wav_i16};

use crate::error::{Error, Result};

/// Status self-reported by the uploader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserStatus {
    Covid,
    Healthy,
    Symptomatic,
    None,
}

impl UserStatus {
    pub fn parse(cell: &str) -> Option<Self> {
        match cell.trim().to_ascii_lowercase().as_str() {
            "" | "none" | "nan" => Some(UserStatus::None),
            "covid-19" | "covid" | "covid19" => Some(UserStatus::Covid),
            "healthy" => Some(UserStatus::Healthy),
            "symptomatic" => Some(UserStatus::Symptomatic),
            _ => None,
        }
    }

    pub fn as_cell(self) -> &'static str {
        match self {
            UserStatus::Covid => "COVID-19",
            UserStatus::Healthy => "healthy",
            UserStatus::Symptomatic => "symptomatic",
            UserStatus::None => "",
        }
    }

    /// The binary class this status contributes to training. `symptomatic`
    /// is ambiguous and contributes nothing.
    pub fn binary(self) -> Option<BinaryLabel> {
        match self {
            UserStatus::Covid => Some(BinaryLabel::Covid),
            UserStatus::Healthy => Some(BinaryLabel::Healthy),
            UserStatus::Symptomatic | UserStatus::None => None,
        }
    }
}

/// A diagnosis entered by an expert annotator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertLabel {
    Covid,
    Healthy,
    Other,
    None,
}

impl ExpertLabel {
    pub fn parse(cell: &str) -> Self {
        match cell.trim().to_ascii_lowercase().as_str() {
            "" | "none" | "nan" => ExpertLabel::None,
            "covid-19" | "covid" | "covid19" => ExpertLabel::Covid,
            "healthy" | "healthy_cough" => ExpertLabel::Healthy,
            _ => ExpertLabel::Other,
        }
    }

    pub fn as_cell(self) -> &'static str {
        match self {
            ExpertLabel::Covid => "COVID-19",
            ExpertLabel::Healthy => "healthy_cough",
            ExpertLabel::Other => "other",
            ExpertLabel::None => "",
        }
    }

    pub fn binary(self) -> Option<BinaryLabel> {
        match self {
            ExpertLabel::Covid => Some(BinaryLabel::Covid),
            ExpertLabel::Healthy => Some(BinaryLabel::Healthy),
            ExpertLabel::Other | ExpertLabel::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn parse(cell: &str) -> Self {
        match cell.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Gender::Male,
            "female" | "f" => Gender::Female,
            _ => Gender::Unknown,
        }
    }

    pub fn as_cell(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "",
        }
    }

    /// Feature encoding: male = 1, female = 0.
    pub fn as_feature(self) -> Option<f64> {
        match self {
            Gender::Male => Some(1.0),
            Gender::Female => Some(0.0),
            Gender::Unknown => None,
        }
    }
}

/// COVID-19 versus healthy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Healthy,
    Covid,
}

impl BinaryLabel {
    pub fn from_positive(positive: bool) -> Self {
        if positive {
            BinaryLabel::Covid
        } else {
            BinaryLabel::Healthy
        }
    }

    pub fn is_positive(self) -> bool {
        self == BinaryLabel::Covid
    }

    pub fn as_cell(self) -> &'static str {
        match self {
            BinaryLabel::Covid => "COVID-19",
            BinaryLabel::Healthy => "healthy",
        }
    }

    pub fn parse(cell: &str) -> Option<Self> {
        match cell.trim().to_ascii_lowercase().as_str() {
            "covid-19" | "covid" => Some(BinaryLabel::Covid),
            "healthy" | "healthy_cough" => Some(BinaryLabel::Healthy),
            _ => None,
        }
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_cell())
    }
}

/// One row of the metadata table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub uuid: String,
    pub user_status: UserStatus,
    pub expert_labels: BTreeMap<String, ExpertLabel>,
    pub gender: Gender,
    pub cough_score: f64,
    pub snr_db: Option<f64>,
}

impl RecordingMeta {
    pub fn expert_label(&self, annotator: &str) -> ExpertLabel {
        self.expert_labels
            .get(annotator)
            .copied()
            .unwrap_or(ExpertLabel::None)
    }
}

/// A loaded metadata table plus the annotator ids found in its header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub annotators: Vec<String>,
    pub records: Vec<RecordingMeta>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, uuid: &str) -> Option<&RecordingMeta> {
        self.records.iter().find(|r| r.uuid == uuid)
    }

    /// Keeps only the configured annotators. Every configured id must be
    /// present in the table.
    pub fn restrict_annotators(mut self, configured: &[String]) -> Result<Self> {
        for id in configured {
            if !self.annotators.contains(id) {
                return Err(Error::Config(format!(
                    "annotator `{id}` is configured but the metadata has no `expert_{id}` column"
                )));
            }
        }
        for r in &mut self.records {
            r.expert_labels.retain(|k, _| configured.contains(k));
        }
        self.annotators = configured.to_vec();
        Ok(self)
    }
}

/// Mono audio buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("audio signal has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio samples".into()));
        }
        Ok(AudioSignal {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    OriginalExpert,
    PseudoModel,
}

impl LabelSource {
    pub fn as_cell(self) -> &'static str {
        match self {
            LabelSource::OriginalExpert => "original_expert",
            LabelSource::PseudoModel => "pseudo_model",
        }
    }

    pub fn parse(cell: &str) -> Option<Self> {
        match cell.trim() {
            "original_expert" => Some(LabelSource::OriginalExpert),
            "pseudo_model" => Some(LabelSource::PseudoModel),
            _ => None,
        }
    }
}

/// Outcome of an agreement scheme for one recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SslStatus {
    Covid,
    Healthy,
    Discarded,
}

impl SslStatus {
    pub fn as_cell(self) -> &'static str {
        match self {
            SslStatus::Covid => "COVID-19",
            SslStatus::Healthy => "healthy",
            SslStatus::Discarded => "discarded",
        }
    }

    pub fn parse(cell: &str) -> Option<Self> {
        match cell.trim() {
            "COVID-19" => Some(SslStatus::Covid),
            "healthy" => Some(SslStatus::Healthy),
            "discarded" => Some(SslStatus::Discarded),
            _ => None,
        }
    }

    pub fn label(self) -> Option<BinaryLabel> {
        match self {
            SslStatus::Covid => Some(BinaryLabel::Covid),
            SslStatus::Healthy => Some(BinaryLabel::Healthy),
            SslStatus::Discarded => None,
        }
    }
}

impl From<BinaryLabel> for SslStatus {
    fn from(l: BinaryLabel) -> Self {
        match l {
            BinaryLabel::Covid => SslStatus::Covid,
            BinaryLabel::Healthy => SslStatus::Healthy,
        }
    }
}

/// Per-recording label state after propagation.
///
/// When an annotator originally diagnosed the recording as COVID-19 or
/// healthy, its slot holds that diagnosis with source `OriginalExpert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub uuid: String,
    pub user_status: UserStatus,
    pub expert_or_pseudo: BTreeMap<String, BinaryLabel>,
    pub label_source: BTreeMap<String, LabelSource>,
    pub ssl_status: SslStatus,
}
