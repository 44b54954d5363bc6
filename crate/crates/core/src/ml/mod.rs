//! Classical ML layer: linear classifiers on standardized per-cough feature
//! rows, plus the resampling, validation and scoring utilities around them.
//!
//! Feature matrices are plain row slices (`&[Vec<f64>]`); labels are `bool`
//! with `true` meaning COVID-19.

mod aggregate;
mod js;
mod kappa;
mod linear;
mod rfecv;
mod roc;
mod shap;
mod smote;
mod split;
mod standardize;
mod trained;

pub use aggregate::{aggregate, aggregate_logit_mean, aggregate_logit_median, Aggregation};
pub use js::{jensen_shannon, mean_js_divergence, JS_BINS, JS_EPS};
pub use kappa::fleiss_kappa;
pub use linear::{fit, fit_lda, fit_logistic, ClassWeight, LinearModel, LogisticProblem, ModelKind, ModelSpec};
pub use rfecv::{rfecv, rfecv_prepared, FoldData, RfecvResult};
pub use roc::{pick_threshold, roc_auc, roc_curve, RocPoint};
pub use shap::{linear_shap, shap_importance};
pub use smote::{smote, Provenance, SmoteOutput};
pub use split::{group_shuffle_split, stratified_group_split, CvSplit, Fold};
pub use standardize::Standardizer;
pub use trained::{fingerprint, TrainedModel, MODEL_FORMAT_VERSION};

use crate::error::{Error, Result};

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` before any logit.
pub const PROB_CLIP: f64 = 1e-12;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_CLIP, 1.0 - PROB_CLIP)
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks that `x` is a non-empty rectangular, finite matrix matching `y`.
pub(crate) fn check_xy(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch(format!("row {i} has {} values, expected {d}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("row {i}")));
        }
    }
    Ok(d)
}

/// Keeps the columns where `mask` is set.
pub fn select_columns(x: &[Vec<f64>], mask: &[bool]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| row.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| *v).collect())
        .collect()
}

pub(crate) fn take_rows<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_closed_forms() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(9f64.ln()) - 0.9).abs() < 1e-15);
        assert!(clip_prob(sigmoid(1000.0)) < 1.0);
        assert!(clip_prob(sigmoid(-1000.0)) > 0.0);
        assert!(logit(clip_prob(sigmoid(-1000.0))).is_finite());
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
    }
}
