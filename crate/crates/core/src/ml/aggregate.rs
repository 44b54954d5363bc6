use serde::{Deserialize, Serialize};

use super::{clip_prob, logit};
use crate::error::{Error, Result};
use crate::stats::median;

/// How per-cough probabilities of one recording become a single score in
/// the logit domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    LogitMean,
    LogitMedian,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::LogitMean => "logit_mean",
            Aggregation::LogitMedian => "logit_median",
        }
    }
}

fn logits(ps: &[f64]) -> Result<Vec<f64>> {
    if ps.is_empty() {
        return Err(Error::EmptyInput("no cough probabilities to aggregate".into()));
    }
    Ok(ps.iter().map(|&p| logit(clip_prob(p))).collect())
}

pub fn aggregate_logit_mean(ps: &[f64]) -> Result<f64> {
    let l = logits(ps)?;
    Ok(l.iter().sum::<f64>() / l.len() as f64)
}

/// Median of the logits; an even count averages the middle two.
pub fn aggregate_logit_median(ps: &[f64]) -> Result<f64> {
    Ok(median(&logits(ps)?))
}

pub fn aggregate(ps: &[f64], how: Aggregation) -> Result<f64> {
    match how {
        Aggregation::LogitMean => aggregate_logit_mean(ps),
        Aggregation::LogitMedian => aggregate_logit_median(ps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let ln9 = 9f64.ln();
        assert_eq!(aggregate_logit_mean(&[0.5, 0.5]).unwrap(), 0.0);
        assert!((aggregate_logit_mean(&[0.9, 0.9]).unwrap() - ln9).abs() < 1e-12);
        assert!(aggregate_logit_mean(&[0.9, 0.1]).unwrap().abs() < 1e-12);
        assert!((aggregate_logit_median(&[0.9]).unwrap() - ln9).abs() < 1e-12);
        assert!(aggregate_logit_median(&[0.1, 0.5, 0.9]).unwrap().abs() < 1e-12);
        assert!((aggregate_logit_median(&[0.5, 0.9]).unwrap() - ln9 / 2.0).abs() < 1e-12);
        assert!(aggregate_logit_mean(&[]).is_err());
        assert!(aggregate_logit_median(&[]).is_err());
    }
}
