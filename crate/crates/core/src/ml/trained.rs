use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{aggregate, select_columns, Aggregation, LinearModel, Standardizer};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted classifier together with everything needed to score raw
/// feature rows and turn recordings into binary decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub feature_mask: Vec<bool>,
    pub model: LinearModel,
    /// Decision threshold on the aggregated logit; `score >= threshold` is
    /// COVID-19.
    pub threshold: f64,
    pub aggregation: Aggregation,
    pub cv_auc: f64,
    pub cv_auc_std: f64,
    /// SHA-256 over the training rows and labels.
    pub training_fingerprint: String,
}

/// SHA-256 over the little-endian bytes of the rows followed by the labels.
pub fn fingerprint(x: &[Vec<f64>], y: &[bool]) -> String {
    let mut h = Sha256::new();
    for row in x {
        for v in row {
            h.update(v.to_le_bytes());
        }
    }
    h.update(y.iter().map(|&b| b as u8).collect::<Vec<_>>());
    hex::encode(h.finalize())
}

impl TrainedModel {
    pub fn selected_names(&self) -> Vec<&str> {
        self.feature_names
            .iter()
            .zip(&self.feature_mask)
            .filter(|(_, &m)| m)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Standardized and masked copy of raw feature rows.
    pub fn prepare(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        select_columns(&self.standardizer.transform(rows), &self.feature_mask)
    }

    pub fn cough_probas(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        self.prepare(rows).iter().map(|r| self.model.predict_proba(r)).collect()
    }

    /// Aggregated logit score of one recording's coughs.
    pub fn recording_score(&self, rows: &[Vec<f64>]) -> Result<f64> {
        aggregate(&self.cough_probas(rows), self.aggregation)
    }

    pub fn predict_recording(&self, rows: &[Vec<f64>]) -> Result<bool> {
        Ok(self.recording_score(rows)? >= self.threshold)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        let selected = self.feature_mask.iter().filter(|&&m| m).count();
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.standardizer.means.len() != d || self.feature_mask.len() != d {
            return Err(Error::DimensionMismatch("model feature layout is inconsistent".into()));
        }
        if selected == 0 || self.model.weights.len() != selected {
            return Err(Error::DimensionMismatch(format!(
                "model has {} weights for {selected} selected features",
                self.model.weights.len()
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::NonFinite("model threshold".into()));
        }
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TrainedModel = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{ClassWeight, ModelSpec};

    #[test]
    fn json_round_trip() {
        let m = TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            feature_names: vec!["a".into(), "b".into()],
            standardizer: Standardizer { means: vec![0.0, 1.0], stds: vec![1.0, 2.0], constant: vec![] },
            feature_mask: vec![false, true],
            model: LinearModel {
                spec: ModelSpec::LogisticRegression { c: 0.1, class_weight: ClassWeight::Balanced },
                weights: vec![0.5],
                bias: -0.25,
                solver: "newton".into(),
                converged: true,
            },
            threshold: 0.1,
            aggregation: Aggregation::LogitMean,
            cv_auc: 0.8,
            cv_auc_std: 0.05,
            training_fingerprint: fingerprint(&[vec![1.0, 2.0]], &[true]),
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save_json(f.path()).unwrap();
        assert_eq!(TrainedModel::load_json(f.path()).unwrap(), m);
        assert_eq!(m.selected_names(), vec!["b"]);
        // x_b = 3 standardizes to 1, decision 0.25
        let p = m.cough_probas(&[vec![9.0, 3.0]])[0];
        assert!((p - crate::ml::sigmoid(0.25)).abs() < 1e-15);
    }
}
