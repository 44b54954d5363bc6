//! Gender as a feature: known genders are kept, unknown ones are predicted
//! from the acoustic features by a classifier trained on the known ones.

use std::collections::BTreeMap;

use crate::dataset::{Corpus, Gender};
use crate::error::{Error, Result};
use crate::features::{FeatureTable, GENDER_FEATURE};
use crate::ml::TrainedModel;
use crate::ssl::{cough_rows, labeled_coughs};
use crate::train::{train_classifier, AggregationPolicy, LabeledCoughs, TrainConfig, TrainReport};

/// Trains `male?` on every recording with a known gender and feature rows.
pub fn train_gender_model(corpus: &Corpus, acoustic: &FeatureTable, cfg: &TrainConfig) -> Result<TrainReport> {
    let labels: BTreeMap<String, bool> = corpus
        .records
        .iter()
        .filter_map(|r| match r.gender {
            Gender::Male => Some((r.uuid.clone(), true)),
            Gender::Female => Some((r.uuid.clone(), false)),
            Gender::Unknown => None,
        })
        .collect();
    let (rows, y, groups) = labeled_coughs(acoustic, &labels);
    if rows.is_empty() {
        return Err(Error::EmptyInput("no recording with a known gender has features".into()));
    }
    if y.iter().all(|&m| m) || y.iter().all(|&m| !m) {
        return Err(Error::SingleClass("known genders are all the same".into()));
    }
    let data = LabeledCoughs {
        rows: &rows,
        labels: &y,
        groups: &groups,
    };
    train_classifier(data, &acoustic.names, cfg, AggregationPolicy::Select)
}

/// Replaces unknown genders by the model's prediction. Known genders and
/// recordings without feature rows are left as they are.
pub fn impute_gender(model: &TrainedModel, corpus: &Corpus, acoustic: &FeatureTable) -> Result<Corpus> {
    let rows = cough_rows(acoustic);
    let mut out = corpus.clone();
    for r in &mut out.records {
        if r.gender != Gender::Unknown {
            continue;
        }
        if let Some(coughs) = rows.get(r.uuid.as_str()) {
            r.gender = if model.predict_recording(coughs)? { Gender::Male } else { Gender::Female };
        }
    }
    Ok(out)
}

/// Appends the `gender` column (male 1, female 0). Every recording in the
/// table must have a known or imputed gender.
pub fn append_gender(table: &mut FeatureTable, corpus: &Corpus) -> Result<()> {
    let values: BTreeMap<&str, f64> = corpus
        .records
        .iter()
        .filter_map(|r| r.gender.as_feature().map(|g| (r.uuid.as_str(), g)))
        .collect();
    if let Some(r) = table.rows.iter().find(|r| !values.contains_key(r.uuid.as_str())) {
        return Err(Error::InvalidParameter(format!("recording {} has no gender", r.uuid)));
    }
    table.push_column(GENDER_FEATURE, |u| values[u]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{RecordingMeta, UserStatus};
    use crate::features::FeatureRow;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corpus_and_table(n: usize, unknown_every: usize) -> (Corpus, FeatureTable, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut corpus = Corpus::default();
        let mut table = FeatureTable::new(vec!["pitch".into(), "noise".into()]);
        let mut truth = Vec::new();
        for i in 0..n {
            let male = rng.random_bool(0.5);
            truth.push(male);
            let uuid = format!("r{i:03}");
            let gender = if i % unknown_every == 0 {
                Gender::Unknown
            } else if male {
                Gender::Male
            } else {
                Gender::Female
            };
            corpus.records.push(RecordingMeta {
                uuid: uuid.clone(),
                user_status: UserStatus::None,
                expert_labels: BTreeMap::new(),
                gender,
                cough_score: 1.0,
                snr_db: Some(20.0),
            });
            for s in 0..3 {
                let pitch = if male { 1.0 } else { -1.0 } + rng.random_range(-0.5..0.5);
                table.rows.push(FeatureRow {
                    uuid: uuid.clone(),
                    segment_index: s,
                    values: vec![pitch, rng.random_range(-1.0..1.0)],
                });
            }
        }
        (corpus, table, truth)
    }

    #[test]
    fn perfectly_encoded_gender_is_recovered() {
        let (corpus, table, truth) = corpus_and_table(80, 4);
        let cfg = TrainConfig {
            budget: 4,
            ..TrainConfig::default()
        };
        let report = train_gender_model(&corpus, &table, &cfg).unwrap();
        let imputed = impute_gender(&report.model, &corpus, &table).unwrap();
        for ((before, after), male) in corpus.records.iter().zip(&imputed.records).zip(truth) {
            if before.gender != Gender::Unknown {
                assert_eq!(before.gender, after.gender);
            } else {
                assert_eq!(after.gender, if male { Gender::Male } else { Gender::Female });
            }
        }
        let mut t = table.clone();
        append_gender(&mut t, &imputed).unwrap();
        assert_eq!(t.names.last().unwrap(), GENDER_FEATURE);
    }

    #[test]
    fn no_known_gender_is_an_error() {
        let (mut corpus, table, _) = corpus_and_table(10, 1);
        corpus.records.iter_mut().for_each(|r| r.gender = Gender::Unknown);
        assert!(train_gender_model(&corpus, &table, &TrainConfig::default()).is_err());
    }
}
