//! Model selection and fitting for one labeling task: TPE over model kinds
//! with SMOTE inside each CV fold, RFECV when the chosen model overfits,
//! aggregation and threshold selection on one held-out group split, then a
//! refit on all rows.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::{
    aggregate, check_xy, fingerprint, fit, pick_threshold, rfecv_prepared, roc_auc, roc_curve, select_columns,
    smote, stratified_group_split, Aggregation, ClassWeight, FoldData, ModelKind, ModelSpec, RfecvResult,
    Standardizer, TrainedModel, MODEL_FORMAT_VERSION,
};
use crate::tpe::{optimize, ParamValue, SearchResult, SearchSpace, TpeSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// TPE trials per model kind.
    pub budget: usize,
    pub n_folds: usize,
    pub val_frac: f64,
    pub smote_k: usize,
    pub seed: u64,
    pub model_kinds: Vec<ModelKind>,
    /// Mean training AUC minus mean CV AUC above which the model counts as
    /// overfitting and RFECV runs.
    pub overfit_gap: f64,
    pub rfecv: bool,
    pub tpe: TpeSettings,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            budget: 100,
            n_folds: 5,
            val_frac: 0.2,
            smote_k: 5,
            seed: 42,
            model_kinds: vec![ModelKind::LogisticRegression, ModelKind::Lda],
            overfit_gap: 0.05,
            rfecv: true,
            tpe: TpeSettings::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.n_folds == 0 || self.model_kinds.is_empty() {
            return Err(Error::Config("budget, n_folds and model_kinds must be non-empty".into()));
        }
        if !(self.val_frac > 0.0 && self.val_frac < 1.0) {
            return Err(Error::Config(format!("val_frac must be in (0, 1), got {}", self.val_frac)));
        }
        Ok(())
    }
}

/// How the recording-level aggregation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationPolicy {
    Fixed(Aggregation),
    /// Whichever has the higher recording-level AUC on the held-out split.
    Select,
}

/// Per-cough training rows with their labels and recording ids.
#[derive(Debug, Clone, Copy)]
pub struct LabeledCoughs<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [bool],
    pub groups: &'a [String],
}

#[derive(Debug, Clone)]
pub struct KindSearch {
    pub kind: ModelKind,
    pub space: SearchSpace,
    pub result: SearchResult,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: TrainedModel,
    pub searches: Vec<KindSearch>,
    /// Search repeated on the reduced feature set after RFECV.
    pub refit_search: Option<KindSearch>,
    pub rfecv: Option<RfecvResult>,
    pub train_auc: f64,
    pub overfit: bool,
    pub val_auc_by_aggregation: Vec<(Aggregation, f64)>,
}

pub fn search_space(kind: ModelKind) -> SearchSpace {
    match kind {
        ModelKind::LogisticRegression => SearchSpace::new()
            .log_uniform("C", 1e-3, 1e2)
            .categorical("class_weight", &["none", "balanced"]),
        ModelKind::Lda => SearchSpace::new().log_uniform("ridge", 1e-8, 1e-2),
    }
}

pub fn spec_from_config(kind: ModelKind, config: &[ParamValue]) -> ModelSpec {
    match kind {
        ModelKind::LogisticRegression => ModelSpec::LogisticRegression {
            c: config[0].real(),
            class_weight: if config[1].choice() == 1 { ClassWeight::Balanced } else { ClassWeight::None },
        },
        ModelKind::Lda => ModelSpec::Lda { ridge: config[0].real() },
    }
}

/// Fold data with SMOTE applied to each training side; the first
/// `n_original[i]` training rows of fold `i` are real.
struct CvData {
    folds: Vec<FoldData>,
    n_original: Vec<usize>,
}

fn prepare_folds(x: &[Vec<f64>], y: &[bool], groups: &[String], cfg: &TrainConfig) -> Result<CvData> {
    let split = stratified_group_split(groups, y, cfg.n_folds, cfg.val_frac, cfg.seed)?;
    let plain = FoldData::from_split(x, y, &split);
    let mut folds = Vec::with_capacity(plain.len());
    let mut n_original = Vec::with_capacity(plain.len());
    for (i, f) in plain.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1000 + i as u64));
        let s = smote(&f.train_x, &f.train_y, cfg.smote_k, &mut rng)?;
        n_original.push(f.train_x.len());
        folds.push(FoldData { train_x: s.x, train_y: s.y, val_x: f.val_x, val_y: f.val_y });
    }
    Ok(CvData { folds, n_original })
}

fn mask_cv(cv: &CvData, mask: &[bool]) -> CvData {
    CvData {
        folds: cv
            .folds
            .iter()
            .map(|f| FoldData {
                train_x: select_columns(&f.train_x, mask),
                train_y: f.train_y.clone(),
                val_x: select_columns(&f.val_x, mask),
                val_y: f.val_y.clone(),
            })
            .collect(),
        n_original: cv.n_original.clone(),
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
    (m, s)
}

struct CvScore {
    mean: f64,
    std: f64,
    train_mean: f64,
}

/// Per-cough validation AUC of `spec` over every fold.
fn cross_validate(spec: &ModelSpec, cv: &CvData) -> Result<CvScore> {
    let per_fold: Vec<Result<(f64, f64)>> = cv
        .folds
        .par_iter()
        .zip(&cv.n_original)
        .map(|(f, &n_orig)| {
            let model = fit(spec, &f.train_x, &f.train_y)?;
            let val: Vec<f64> = f.val_x.iter().map(|r| model.decision(r)).collect();
            let train: Vec<f64> = f.train_x[..n_orig].iter().map(|r| model.decision(r)).collect();
            Ok((roc_auc(&val, &f.val_y)?, roc_auc(&train, &f.train_y[..n_orig])?))
        })
        .collect();
    let mut val = Vec::new();
    let mut train = Vec::new();
    for r in per_fold {
        let (v, t) = r?;
        val.push(v);
        train.push(t);
    }
    let (mean, std) = mean_std(&val);
    Ok(CvScore { mean, std, train_mean: mean_std(&train).0 })
}

fn run_search(kind: ModelKind, cv: &CvData, cfg: &TrainConfig, seed: u64) -> Result<KindSearch> {
    let space = search_space(kind);
    let result = optimize(&space, &cfg.tpe, cfg.budget, seed, |c| {
        let s = cross_validate(&spec_from_config(kind, c), cv)?;
        Ok((s.mean, s.std))
    })?;
    Ok(KindSearch { kind, space, result })
}

/// Recording ids in first-appearance order with their cough row indices.
fn by_recording(groups: &[String], idx: &[usize]) -> Vec<(String, Vec<usize>)> {
    let mut order: Vec<(String, Vec<usize>)> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in idx {
        let g = groups[i].as_str();
        match slot.get(g) {
            Some(&s) => order[s].1.push(i),
            None => {
                slot.insert(g, order.len());
                order.push((g.to_string(), vec![i]));
            }
        }
    }
    order
}

pub fn train_classifier(
    data: LabeledCoughs,
    feature_names: &[String],
    cfg: &TrainConfig,
    aggregation: AggregationPolicy,
) -> Result<TrainReport> {
    cfg.validate()?;
    let d = check_xy(data.rows, data.labels)?;
    if data.groups.len() != data.rows.len() || feature_names.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} rows, {} groups, {} feature names, {d} columns",
            data.rows.len(),
            data.groups.len(),
            feature_names.len()
        )));
    }
    let standardizer = Standardizer::fit(data.rows);
    let xs = standardizer.transform(data.rows);
    let y = data.labels;
    let cv = prepare_folds(&xs, y, data.groups, cfg)?;

    let mut searches = Vec::new();
    for (k, &kind) in cfg.model_kinds.iter().enumerate() {
        searches.push(run_search(kind, &cv, cfg, cfg.seed.wrapping_add(10 * k as u64 + 1))?);
    }
    let best_kind_idx = (0..searches.len())
        .reduce(|a, b| {
            if searches[b].result.best_trial().objective > searches[a].result.best_trial().objective {
                b
            } else {
                a
            }
        })
        .unwrap();
    let best = &searches[best_kind_idx];
    if !best.result.best_trial().objective.is_finite() {
        return Err(Error::SingleClass("every hyperparameter trial failed".into()));
    }
    let kind = best.kind;
    let mut spec = spec_from_config(kind, &best.result.best_trial().config);
    let first = cross_validate(&spec, &cv)?;
    let (mut cv_mean, mut cv_std) = (first.mean, first.std);
    let overfit = first.train_mean - first.mean > cfg.overfit_gap;

    let mut mask = vec![true; d];
    let mut rfecv_result = None;
    let mut refit_search = None;
    let mut full_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2000));
    let full = smote(&xs, y, cfg.smote_k, &mut full_rng)?;
    if overfit && cfg.rfecv && d >= 2 {
        let fit_spec = spec;
        let r = rfecv_prepared(|x, y| fit(&fit_spec, x, y), &cv.folds, &full.x, &full.y)?;
        if r.mask.iter().any(|m| !m) {
            mask = r.mask.clone();
            let masked = mask_cv(&cv, &mask);
            let search = run_search(kind, &masked, cfg, cfg.seed.wrapping_add(101))?;
            spec = spec_from_config(kind, &search.result.best_trial().config);
            cv_mean = search.result.best_trial().objective;
            cv_std = search.result.best_trial().std;
            refit_search = Some(search);
        }
        rfecv_result = Some(r);
    }

    // Aggregation and operating point on one more held-out group split.
    let holdout = stratified_group_split(data.groups, y, 1, cfg.val_frac, cfg.seed.wrapping_add(3000))?;
    let fold = &holdout.folds[0];
    let (xt, yt): (Vec<Vec<f64>>, Vec<bool>) = fold.train.iter().map(|&i| (xs[i].clone(), y[i])).unzip();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3001));
    let st = smote(&xt, &yt, cfg.smote_k, &mut rng)?;
    let holdout_model = fit(&spec, &select_columns(&st.x, &mask), &st.y)?;
    let recordings = by_recording(data.groups, &fold.val);
    let rec_labels: Vec<bool> = recordings.iter().map(|(_, rows)| y[rows[0]]).collect();
    let mut val_auc_by_aggregation = Vec::new();
    let mut rec_scores = BTreeMap::new();
    for how in [Aggregation::LogitMean, Aggregation::LogitMedian] {
        let scores = recordings
            .iter()
            .map(|(_, rows)| {
                let ps: Vec<f64> = select_columns(&crate::ml::take_rows(&xs, rows), &mask)
                    .iter()
                    .map(|r| holdout_model.predict_proba(r))
                    .collect();
                aggregate(&ps, how)
            })
            .collect::<Result<Vec<f64>>>()?;
        val_auc_by_aggregation.push((how, roc_auc(&scores, &rec_labels)?));
        rec_scores.insert(how.name(), scores);
    }
    let chosen = match aggregation {
        AggregationPolicy::Fixed(a) => a,
        AggregationPolicy::Select => {
            if val_auc_by_aggregation[1].1 > val_auc_by_aggregation[0].1 {
                Aggregation::LogitMedian
            } else {
                Aggregation::LogitMean
            }
        }
    };
    let threshold = pick_threshold(&roc_curve(&rec_scores[chosen.name()], &rec_labels)?)?.threshold;

    let model = fit(&spec, &select_columns(&full.x, &mask), &full.y)?;
    let trained = TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: feature_names.to_vec(),
        standardizer,
        feature_mask: mask,
        model,
        threshold,
        aggregation: chosen,
        cv_auc: cv_mean,
        cv_auc_std: cv_std,
        training_fingerprint: fingerprint(data.rows, data.labels),
    };
    trained.validate()?;
    Ok(TrainReport {
        model: trained,
        searches,
        refit_search,
        rfecv: rfecv_result,
        train_auc: first.train_mean,
        overfit,
        val_auc_by_aggregation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn toy(n_rec: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>, Vec<String>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut x, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
        for r in 0..n_rec {
            let label = r % 3 == 0;
            for _ in 0..3 {
                let mut row: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
                if label {
                    row[0] += 1.5;
                }
                x.push(row);
                y.push(label);
                g.push(format!("rec{r}"));
            }
        }
        (x, y, g)
    }

    #[test]
    fn trains_and_is_deterministic() {
        let (x, y, g) = toy(60, 1);
        let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let cfg = TrainConfig { budget: 12, ..Default::default() };
        let data = LabeledCoughs { rows: &x, labels: &y, groups: &g };
        let a = train_classifier(data, &names, &cfg, AggregationPolicy::Select).unwrap();
        let b = train_classifier(data, &names, &cfg, AggregationPolicy::Select).unwrap();
        assert_eq!(a.model, b.model);
        assert!(a.model.cv_auc > 0.75, "{}", a.model.cv_auc);
        assert_eq!(a.searches.len(), 2);
        assert!(a.model.feature_mask[0]);
        let fixed = train_classifier(data, &names, &cfg, AggregationPolicy::Fixed(Aggregation::LogitMedian)).unwrap();
        assert_eq!(fixed.model.aggregation, Aggregation::LogitMedian);
    }
}
