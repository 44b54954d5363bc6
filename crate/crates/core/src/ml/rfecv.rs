use rayon::prelude::*;

use super::{roc_auc, select_columns, take_rows, CvSplit, LinearModel};
use crate::error::{Error, Result};

/// Materialized rows of one fold; the training side may already be
/// oversampled.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<bool>,
    pub val_x: Vec<Vec<f64>>,
    pub val_y: Vec<bool>,
}

impl FoldData {
    pub fn from_split(x: &[Vec<f64>], y: &[bool], split: &CvSplit) -> Vec<FoldData> {
        split
            .folds
            .iter()
            .map(|f| FoldData {
                train_x: take_rows(x, &f.train),
                train_y: take_rows(y, &f.train),
                val_x: take_rows(x, &f.val),
                val_y: take_rows(y, &f.val),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfecvResult {
    pub mask: Vec<bool>,
    /// `(feature count, mean validation AUC over folds)`, ascending count.
    pub mean_auc_by_count: Vec<(usize, f64)>,
}

fn weakest(model: &LinearModel) -> usize {
    let mut best = 0;
    for (j, w) in model.weights.iter().enumerate() {
        if w.abs() < model.weights[best].abs() {
            best = j;
        }
    }
    best
}

fn active_mask(d: usize, active: &[usize]) -> Vec<bool> {
    let mut m = vec![false; d];
    for &j in active {
        m[j] = true;
    }
    m
}

/// Recursive feature elimination with cross-validation. Within each fold the
/// feature with the smallest absolute weight is dropped one at a time and
/// every intermediate model is scored by validation AUC. The count with the
/// best mean AUC wins (ties go to fewer features) and elimination is then
/// replayed on all rows down to that count.
pub fn rfecv<F>(fit_fn: F, x: &[Vec<f64>], y: &[bool], split: &CvSplit) -> Result<RfecvResult>
where
    F: Fn(&[Vec<f64>], &[bool]) -> Result<LinearModel> + Sync,
{
    rfecv_prepared(fit_fn, &FoldData::from_split(x, y, split), x, y)
}

/// [`rfecv`] over already materialized folds; `x`, `y` are the rows used
/// for the final elimination.
pub fn rfecv_prepared<F>(fit_fn: F, folds: &[FoldData], x: &[Vec<f64>], y: &[bool]) -> Result<RfecvResult>
where
    F: Fn(&[Vec<f64>], &[bool]) -> Result<LinearModel> + Sync,
{
    let d = x.first().map(|r| r.len()).unwrap_or(0);
    if d < 2 {
        return Err(Error::InvalidParameter("RFECV needs at least 2 features".into()));
    }
    let per_fold: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|fold| {
            let (xt, yt) = (&fold.train_x, &fold.train_y);
            let (xv, yv) = (&fold.val_x, &fold.val_y);
            let mut scores = vec![f64::NEG_INFINITY; d + 1];
            let mut active: Vec<usize> = (0..d).collect();
            loop {
                let mask = active_mask(d, &active);
                let model = fit_fn(&select_columns(xt, &mask), yt);
                let Ok(model) = model else { break };
                let xv_m = select_columns(xv, &mask);
                let s: Vec<f64> = xv_m.iter().map(|r| model.decision(r)).collect();
                scores[active.len()] = roc_auc(&s, yv).unwrap_or(f64::NEG_INFINITY);
                if active.len() == 1 {
                    break;
                }
                active.remove(weakest(&model));
            }
            scores
        })
        .collect();

    let mean_auc_by_count: Vec<(usize, f64)> = (1..=d)
        .map(|c| (c, per_fold.iter().map(|s| s[c]).sum::<f64>() / per_fold.len().max(1) as f64))
        .collect();
    let mut best = mean_auc_by_count[0];
    for &(c, a) in &mean_auc_by_count[1..] {
        if a > best.1 + 1e-12 {
            best = (c, a);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::SingleClass("RFECV could not score any feature count".into()));
    }

    let mut active: Vec<usize> = (0..d).collect();
    while active.len() > best.0 {
        let model = fit_fn(&select_columns(x, &active_mask(d, &active)), y)?;
        active.remove(weakest(&model));
    }
    Ok(RfecvResult {
        mask: active_mask(d, &active),
        mean_auc_by_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{fit_logistic, group_shuffle_split, ClassWeight};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identical_features_keep_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            let label = i % 2 == 0;
            let v: f64 = rng.sample::<f64, _>(StandardNormal) + if label { 1.0 } else { 0.0 };
            x.push(vec![v, v, v]);
            y.push(label);
        }
        let groups: Vec<String> = (0..60).map(|i| format!("g{i}")).collect();
        let split = group_shuffle_split(&groups, 5, 0.2, 1).unwrap();
        let r = rfecv(|x, y| fit_logistic(x, y, 1.0, ClassWeight::None), &x, &y, &split).unwrap();
        assert_eq!(r.mask.iter().filter(|&&m| m).count(), 1);
    }
}
