use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_agreement, cough_rows, labeled_coughs, majority_conflict, AgreementScheme};
use crate::dataset::{BinaryLabel, Corpus, LabelRecord, LabelSource, SslStatus};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::ml::{Aggregation, TrainedModel};
use crate::train::{train_classifier, AggregationPolicy, LabeledCoughs, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub annotator: String,
    pub reason: String,
}

/// One trained model per eligible annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertModelSet {
    pub models: BTreeMap<String, TrainedModel>,
    pub excluded: Vec<Exclusion>,
}

impl ExpertModelSet {
    pub fn annotators(&self) -> Vec<String> {
        self.models.keys().cloned().collect()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<ExpertModelSet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: ExpertModelSet = serde_json::from_str(&text)?;
        for m in set.models.values() {
            m.validate()?;
        }
        Ok(set)
    }
}

/// `uuid -> covid?` for every recording the annotator diagnosed as COVID-19
/// or healthy and that has at least one feature row.
pub fn expert_training_labels(corpus: &Corpus, features: &FeatureTable, annotator: &str) -> BTreeMap<String, bool> {
    let present: std::collections::HashSet<&str> = features.rows.iter().map(|r| r.uuid.as_str()).collect();
    corpus
        .records
        .iter()
        .filter(|r| present.contains(r.uuid.as_str()))
        .filter_map(|r| r.expert_label(annotator).binary().map(|l| (r.uuid.clone(), l.is_positive())))
        .collect()
}

/// Trains one model per annotator that has at least `min_per_class`
/// recordings in each class. Aggregation is fixed to the logit mean.
pub fn train_expert_models(
    corpus: &Corpus,
    features: &FeatureTable,
    min_per_class: usize,
    cfg: &TrainConfig,
) -> Result<(ExpertModelSet, Vec<(String, TrainReport)>)> {
    let mut set = ExpertModelSet {
        models: BTreeMap::new(),
        excluded: Vec::new(),
    };
    let mut reports = Vec::new();
    for annotator in &corpus.annotators {
        let labels = expert_training_labels(corpus, features, annotator);
        let pos = labels.values().filter(|&&p| p).count();
        let neg = labels.len() - pos;
        if pos.min(neg) < min_per_class {
            log::warn!("annotator {annotator} excluded: {pos} covid / {neg} healthy recordings");
            set.excluded.push(Exclusion {
                annotator: annotator.clone(),
                reason: format!("minority count < {min_per_class} ({pos} covid, {neg} healthy)"),
            });
            continue;
        }
        log::info!("training expert model {annotator} on {pos} covid / {neg} healthy recordings");
        let (rows, y, groups) = labeled_coughs(features, &labels);
        let data = LabeledCoughs {
            rows: &rows,
            labels: &y,
            groups: &groups,
        };
        let report = train_classifier(data, &features.names, cfg, AggregationPolicy::Fixed(Aggregation::LogitMean))?;
        set.models.insert(annotator.clone(), report.model.clone());
        reports.push((annotator.clone(), report));
    }
    if set.models.is_empty() {
        return Err(Error::NoEligibleAnnotator(format!(
            "no annotator has {min_per_class} recordings in each class"
        )));
    }
    Ok((set, reports))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// One record per labelable recording, in corpus order, with
    /// `ssl_status` still `Discarded`.
    pub records: Vec<LabelRecord>,
    /// Recordings without any feature row.
    pub unlabelable: Vec<String>,
}

/// Fills every expert slot of every recording: the annotator's own
/// COVID-19/healthy diagnosis when there is one, the model's thresholded
/// aggregate otherwise.
pub fn propagate(models: &ExpertModelSet, corpus: &Corpus, features: &FeatureTable) -> Result<Propagation> {
    let rows = cough_rows(features);
    let out: Vec<Option<LabelRecord>> = corpus
        .records
        .par_iter()
        .map(|meta| {
            let Some(coughs) = rows.get(meta.uuid.as_str()) else {
                return Ok(None);
            };
            let mut labels = BTreeMap::new();
            let mut sources = BTreeMap::new();
            for (annotator, model) in &models.models {
                let (label, source) = match meta.expert_label(annotator).binary() {
                    Some(l) => (l, LabelSource::OriginalExpert),
                    None => (
                        BinaryLabel::from_positive(model.predict_recording(coughs)?),
                        LabelSource::PseudoModel,
                    ),
                };
                labels.insert(annotator.clone(), label);
                sources.insert(annotator.clone(), source);
            }
            Ok(Some(LabelRecord {
                uuid: meta.uuid.clone(),
                user_status: meta.user_status,
                expert_or_pseudo: labels,
                label_source: sources,
                ssl_status: SslStatus::Discarded,
            }))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut unlabelable = Vec::new();
    for (meta, r) in corpus.records.iter().zip(out) {
        match r {
            Some(r) => records.push(r),
            None => unlabelable.push(meta.uuid.clone()),
        }
    }
    if !unlabelable.is_empty() {
        log::warn!("{} recordings have no segments and are left unlabeled", unlabelable.len());
    }
    Ok(Propagation { records, unlabelable })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SslDataset {
    pub scheme: AgreementScheme,
    pub annotators: Vec<String>,
    pub records: Vec<LabelRecord>,
    pub unlabelable: Vec<String>,
    /// Recordings discarded because the user label contradicts a majority.
    pub majority_conflicts: Vec<String>,
}

impl SslDataset {
    /// `uuid -> covid?` for the kept recordings.
    pub fn kept_labels(&self) -> BTreeMap<String, bool> {
        self.records
            .iter()
            .filter_map(|r| r.ssl_status.label().map(|l| (r.uuid.clone(), l.is_positive())))
            .collect()
    }
}

/// Propagates pseudo-labels and applies `scheme` to every recording.
pub fn build_ssl_dataset(
    models: &ExpertModelSet,
    corpus: &Corpus,
    features: &FeatureTable,
    scheme: AgreementScheme,
) -> Result<SslDataset> {
    let annotators = models.annotators();
    let Propagation { mut records, unlabelable } = propagate(models, corpus, features)?;
    let mut majority_conflicts = Vec::new();
    for r in &mut records {
        r.ssl_status = apply_agreement(r, &annotators, scheme)?;
        if majority_conflict(r, &annotators)? {
            majority_conflicts.push(r.uuid.clone());
        }
    }
    Ok(SslDataset {
        scheme,
        annotators,
        records,
        unlabelable,
        majority_conflicts,
    })
}
