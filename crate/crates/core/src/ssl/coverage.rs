use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{apply_agreement, labeled_coughs, majority_conflict, AgreementScheme};
use crate::dataset::LabelRecord;
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::ml::mean_js_divergence;

/// Where a recording's training label comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LabelScheme {
    /// The uploader's self-label (symptomatic counts as unlabeled).
    User,
    Agreement(AgreementScheme),
}

impl LabelScheme {
    pub const ALL: [LabelScheme; 4] = [
        LabelScheme::User,
        LabelScheme::Agreement(AgreementScheme::Universal),
        LabelScheme::Agreement(AgreementScheme::Expert),
        LabelScheme::Agreement(AgreementScheme::Majority),
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelScheme::User => "user",
            LabelScheme::Agreement(a) => a.name(),
        }
    }
}

/// `uuid -> covid?` for every record that `scheme` keeps.
pub fn scheme_labels(records: &[LabelRecord], annotators: &[String], scheme: LabelScheme) -> Result<BTreeMap<String, bool>> {
    let mut out = BTreeMap::new();
    for r in records {
        let label = match scheme {
            LabelScheme::User => r.user_status.binary(),
            LabelScheme::Agreement(a) => apply_agreement(r, annotators, a)?.label(),
        };
        if let Some(l) = label {
            out.insert(r.uuid.clone(), l.is_positive());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SubsetCounts {
    pub recordings: usize,
    pub positive_recordings: usize,
    pub coughs: usize,
    pub positive_coughs: usize,
}

impl SubsetCounts {
    fn tally(labels: &BTreeMap<String, bool>, cough_labels: &[bool]) -> Self {
        SubsetCounts {
            recordings: labels.len(),
            positive_recordings: labels.values().filter(|&&p| p).count(),
            coughs: cough_labels.len(),
            positive_coughs: cough_labels.iter().filter(|&&p| p).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeCoverage {
    pub scheme: String,
    pub train: SubsetCounts,
    pub test: SubsetCounts,
    /// Mean over features of the JS divergence between the kept training
    /// coughs of each class; NaN when a class is empty.
    pub mean_js: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub rows: Vec<SchemeCoverage>,
    /// Recordings where two or more models agree but the user label
    /// contradicts them.
    pub majority_conflicts: usize,
}

/// Tallies every label scheme over `records`. Recordings in `test` are
/// counted separately and excluded from the JS divergence.
pub fn coverage_report(
    records: &[LabelRecord],
    annotators: &[String],
    features: &FeatureTable,
    test: &BTreeSet<String>,
) -> Result<CoverageReport> {
    let mut rows = Vec::new();
    for scheme in LabelScheme::ALL {
        let labels = scheme_labels(records, annotators, scheme)?;
        let (train_l, test_l): (BTreeMap<_, _>, BTreeMap<_, _>) =
            labels.into_iter().partition(|(u, _)| !test.contains(u));
        let (x, y, _) = labeled_coughs(features, &train_l);
        let (_, yt, _) = labeled_coughs(features, &test_l);
        let pos: Vec<Vec<f64>> = x.iter().zip(&y).filter(|(_, &l)| l).map(|(r, _)| r.clone()).collect();
        let neg: Vec<Vec<f64>> = x.iter().zip(&y).filter(|(_, &l)| !l).map(|(r, _)| r.clone()).collect();
        let mean_js = if pos.is_empty() || neg.is_empty() {
            log::warn!("scheme {} keeps no training coughs of one class", scheme.name());
            f64::NAN
        } else {
            mean_js_divergence(&pos, &neg)?
        };
        rows.push(SchemeCoverage {
            scheme: scheme.name().to_string(),
            train: SubsetCounts::tally(&train_l, &y),
            test: SubsetCounts::tally(&test_l, &yt),
            mean_js,
        });
    }
    let mut majority_conflicts = 0;
    for r in records {
        majority_conflicts += majority_conflict(r, annotators)? as usize;
    }
    Ok(CoverageReport { rows, majority_conflicts })
}

impl CoverageReport {
    pub fn get(&self, scheme: LabelScheme) -> Option<&SchemeCoverage> {
        self.rows.iter().find(|r| r.scheme == scheme.name())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = [
            "scheme",
            "train_recordings",
            "train_positive_recordings",
            "train_coughs",
            "train_positive_coughs",
            "test_recordings",
            "test_positive_recordings",
            "test_coughs",
            "test_positive_coughs",
            "mean_js",
        ];
        w.write_record(header).map_err(|e| Error::csv(path, e))?;
        for r in &self.rows {
            let (a, b) = (r.train, r.test);
            let cells = [
                r.scheme.clone(),
                a.recordings.to_string(),
                a.positive_recordings.to_string(),
                a.coughs.to_string(),
                a.positive_coughs.to_string(),
                b.recordings.to_string(),
                b.positive_recordings.to_string(),
                b.coughs.to_string(),
                b.positive_coughs.to_string(),
                r.mean_js.to_string(),
            ];
            w.write_record(&cells).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Plain-text table in the "count (positives)" style.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>16} {:>18} {:>16} {:>18} {:>9}",
            "scheme", "train recordings", "train coughs", "test recordings", "test coughs", "mean JS"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<10} {:>16} {:>18} {:>16} {:>18} {:>9.5}",
                r.scheme,
                format!("{} ({})", r.train.recordings, r.train.positive_recordings),
                format!("{} ({})", r.train.coughs, r.train.positive_coughs),
                format!("{} ({})", r.test.recordings, r.test.positive_recordings),
                format!("{} ({})", r.test.coughs, r.test.positive_coughs),
                r.mean_js
            );
        }
        let _ = writeln!(s, "majority conflicts (discarded): {}", self.majority_conflicts);
        s
    }
}
