//! Semi-supervised relabeling: one model per expert annotator, pseudo-labels
//! for every recording the annotator did not diagnose, and an agreement
//! scheme deciding which recordings keep a label.

mod agreement;
mod coverage;
mod evaluate;
mod experts;

use std::collections::{BTreeMap, HashMap};

pub use agreement::{apply_agreement, majority_conflict, AgreementScheme};
pub use coverage::{coverage_report, scheme_labels, CoverageReport, LabelScheme, SchemeCoverage, SubsetCounts};
pub use evaluate::{evaluate, train_final_model, write_roc_csv, Evaluation};
pub use experts::{
    build_ssl_dataset, expert_training_labels, propagate, train_expert_models, Exclusion, ExpertModelSet,
    Propagation, SslDataset,
};

use crate::features::FeatureTable;

/// Feature rows of each recording, keyed by uuid.
pub fn cough_rows(features: &FeatureTable) -> HashMap<&str, Vec<Vec<f64>>> {
    let mut out: HashMap<&str, Vec<Vec<f64>>> = HashMap::new();
    for r in &features.rows {
        out.entry(r.uuid.as_str()).or_default().push(r.values.clone());
    }
    out
}

/// Rows, labels and recording ids of every cough whose recording appears in
/// `labels`, in table order.
pub fn labeled_coughs(features: &FeatureTable, labels: &BTreeMap<String, bool>) -> (Vec<Vec<f64>>, Vec<bool>, Vec<String>) {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut groups = Vec::new();
    for r in &features.rows {
        if let Some(&l) = labels.get(&r.uuid) {
            rows.push(r.values.clone());
            y.push(l);
            groups.push(r.uuid.clone());
        }
    }
    (rows, y, groups)
}
