use crate::error::{Error, Result};

/// Fleiss' kappa for an items x categories matrix of rating counts. Every
/// item must be rated by the same number of raters (at least two).
///
/// When chance agreement is already perfect (all ratings in one category)
/// the statistic is 0/0; it is reported as 1 since every rater agrees.
pub fn fleiss_kappa(counts: &[Vec<usize>]) -> Result<f64> {
    let first = counts.first().ok_or_else(|| Error::EmptyInput("no rated items".into()))?;
    let n: usize = first.iter().sum();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 raters per item, found {n}")));
    }
    let k = first.len();
    for (i, row) in counts.iter().enumerate() {
        let found: usize = row.iter().sum();
        if found != n || row.len() != k {
            return Err(Error::UnequalRaters { item: i, expected: n, found });
        }
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let p_bar = counts
        .iter()
        .map(|row| {
            let sq: usize = row.iter().map(|c| c * c).sum();
            (sq as f64 - nf) / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..k)
        .map(|j| {
            let pj = counts.iter().map(|row| row[j]).sum::<usize>() as f64 / (items * nf);
            pj * pj
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_agreement_is_one() {
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![0, 3]]).unwrap(), 1.0);
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]]).unwrap(), 1.0);
    }

    #[test]
    fn two_items_two_raters() {
        // (A,A) and (A,B): P = (1 + 0)/2, p_A = 3/4, p_B = 1/4,
        // Pe = 10/16, kappa = (0.5 - 0.625)/(0.375) = -1/3
        let k = fleiss_kappa(&[vec![2, 0], vec![1, 1]]).unwrap();
        assert!((k + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unequal_raters_rejected() {
        assert!(matches!(
            fleiss_kappa(&[vec![2, 0], vec![1, 2]]),
            Err(Error::UnequalRaters { item: 1, .. })
        ));
    }
}
