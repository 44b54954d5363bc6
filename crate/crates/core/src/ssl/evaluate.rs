use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::{cough_rows, labeled_coughs};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::ml::{roc_auc, roc_curve, RocPoint, TrainedModel};
use crate::train::{train_classifier, AggregationPolicy, LabeledCoughs, TrainConfig, TrainReport};

fn require_both_classes(labels: &BTreeMap<String, bool>, what: &str) -> Result<()> {
    let pos = labels.values().filter(|&&p| p).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass(format!(
            "{what} has {pos} covid and {} healthy recordings",
            labels.len() - pos
        )));
    }
    Ok(())
}

/// Trains a classifier on the recordings in `labels`, choosing the
/// aggregation by held-out AUC.
pub fn train_final_model(features: &FeatureTable, labels: &BTreeMap<String, bool>, cfg: &TrainConfig) -> Result<TrainReport> {
    let (rows, y, groups) = labeled_coughs(features, labels);
    let present: BTreeMap<String, bool> = groups.iter().map(|g| (g.clone(), labels[g])).collect();
    require_both_classes(&present, "training set")?;
    let data = LabeledCoughs {
        rows: &rows,
        labels: &y,
        groups: &groups,
    };
    train_classifier(data, &features.names, cfg, AggregationPolicy::Select)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub auc_cough: f64,
    pub auc_recording: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub threshold: f64,
    pub n_recordings: usize,
    pub n_positive_recordings: usize,
    pub n_coughs: usize,
    /// Recording-level ROC curve.
    #[serde(skip)]
    pub roc: Vec<RocPoint>,
}

/// Scores `model` on the recordings in `labels`, per cough and per
/// recording, with sensitivity and specificity at the stored threshold.
pub fn evaluate(model: &TrainedModel, features: &FeatureTable, labels: &BTreeMap<String, bool>) -> Result<Evaluation> {
    if features.names != model.feature_names {
        return Err(Error::DimensionMismatch("feature table columns differ from the model's".into()));
    }
    let rows = cough_rows(features);
    let mut cough_scores = Vec::new();
    let mut cough_y = Vec::new();
    let mut rec_scores = Vec::new();
    let mut rec_y = Vec::new();
    for (uuid, &label) in labels {
        let Some(coughs) = rows.get(uuid.as_str()) else { continue };
        let ps = model.cough_probas(coughs);
        cough_y.extend(std::iter::repeat_n(label, ps.len()));
        cough_scores.extend_from_slice(&ps);
        rec_scores.push(model.recording_score(coughs)?);
        rec_y.push(label);
    }
    let present: BTreeMap<String, bool> = rec_y.iter().enumerate().map(|(i, &l)| (i.to_string(), l)).collect();
    require_both_classes(&present, "test set")?;
    let positives = rec_y.iter().filter(|&&l| l).count();
    let hits = |want: bool| {
        rec_scores
            .iter()
            .zip(&rec_y)
            .filter(|(&s, &l)| l == want && (s >= model.threshold) == want)
            .count() as f64
    };
    Ok(Evaluation {
        auc_cough: roc_auc(&cough_scores, &cough_y)?,
        auc_recording: roc_auc(&rec_scores, &rec_y)?,
        sensitivity: hits(true) / positives as f64,
        specificity: hits(false) / (rec_y.len() - positives) as f64,
        threshold: model.threshold,
        n_recordings: rec_y.len(),
        n_positive_recordings: positives,
        n_coughs: cough_y.len(),
        roc: roc_curve(&rec_scores, &rec_y)?,
    })
}

/// `fpr,tpr,threshold` rows; the leading point has threshold `inf`.
pub fn write_roc_csv(points: &[RocPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["fpr", "tpr", "threshold"]).map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
