use serde::Serialize;

use crate::error::{Error, Result};

/// One operating point: predicting positive when `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

impl RocPoint {
    pub fn gmean(&self) -> f64 {
        (self.tpr * (1.0 - self.fpr)).sqrt()
    }
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("ROC scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("ROC needs both classes".into()));
    }
    Ok((pos, neg))
}

/// ROC points from the strictest threshold (`+inf`, nothing positive) down
/// to the loosest, one point per distinct score.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s,
        });
    }
    Ok(points)
}

/// Trapezoidal area under [`roc_curve`]; tied scores contribute a diagonal
/// segment, which counts each positive/negative tie as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let pts = roc_curve(scores, labels)?;
    Ok(pts
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum())
}

/// Threshold with the highest `sqrt(TPR * (1 - FPR))`; ties go to the point
/// with lower FPR. The `+inf` starting point is only returned when it is the
/// sole point.
pub fn pick_threshold(points: &[RocPoint]) -> Result<RocPoint> {
    let finite: Vec<&RocPoint> = points.iter().filter(|p| p.threshold.is_finite()).collect();
    let candidates: Vec<&RocPoint> = if finite.is_empty() { points.iter().collect() } else { finite };
    candidates
        .into_iter()
        .copied()
        .reduce(|best, p| {
            let (gb, gp) = (best.gmean(), p.gmean());
            if gp > gb || (gp == gb && p.fpr < best.fpr) {
                p
            } else {
                best
            }
        })
        .ok_or_else(|| Error::EmptyInput("empty ROC curve".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_tied() {
        let labels = [false, false, true, true];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 0.0);
        let best = pick_threshold(&roc_curve(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap()).unwrap();
        assert_eq!(best.gmean(), 1.0);
        assert_eq!(best.threshold, 0.8);
    }

    #[test]
    fn single_point_is_returned() {
        let p = RocPoint { fpr: 0.3, tpr: 0.6, threshold: 1.5 };
        assert_eq!(pick_threshold(&[p]).unwrap(), p);
    }

    #[test]
    fn single_class_errors() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass(_))));
    }
}
