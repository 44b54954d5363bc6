//! Grouped-CV model selection with TPE, SMOTE inside each fold, optional
//! RFECV, and a gmean threshold on aggregated recording scores.

use cough_ssl::ml::{roc_auc, ModelKind};
use cough_ssl::synth::{simulate_cough_features, CoughFeatureSim};
use cough_ssl::train::{train_classifier, AggregationPolicy, LabeledCoughs, TrainConfig};

fn main() -> cough_ssl::Result<()> {
    let sim = CoughFeatureSim::default();
    let (rows, labels, groups) = simulate_cough_features(&sim, 11);
    let names: Vec<String> = (0..sim.n_features).map(|j| format!("f{j}")).collect();
    let cfg = TrainConfig {
        budget: 15,
        model_kinds: vec![ModelKind::LogisticRegression, ModelKind::Lda],
        ..TrainConfig::default()
    };
    let data = LabeledCoughs { rows: &rows, labels: &labels, groups: &groups };
    let report = train_classifier(data, &names, &cfg, AggregationPolicy::Select)?;

    let m = &report.model;
    println!("model: {:?}", m.model.spec);
    println!("CV AUC {:.3} +/- {:.3}, train AUC {:.3}, overfit: {}", m.cv_auc, m.cv_auc_std, report.train_auc, report.overfit);
    println!("aggregation {}, threshold {:.3}", m.aggregation.name(), m.threshold);
    println!("features kept: {:?}", m.selected_names());
    for (agg, auc) in &report.val_auc_by_aggregation {
        println!("  held-out recording AUC with {}: {auc:.3}", agg.name());
    }

    // Fresh recordings from the same simulator.
    let (test_rows, test_labels, test_groups) = simulate_cough_features(&sim, 12);
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    let mut start = 0;
    while start < test_rows.len() {
        let end = (start..test_rows.len()).find(|&i| test_groups[i] != test_groups[start]).unwrap_or(test_rows.len());
        scores.push(m.recording_score(&test_rows[start..end])?);
        truth.push(test_labels[start]);
        start = end;
    }
    println!("test recording AUC {:.3}", roc_auc(&scores, &truth)?);
    Ok(())
}
