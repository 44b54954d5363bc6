use rand::Rng;

use crate::error::{Error, Result};

/// Where an output row of [`smote`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Original(usize),
    /// Interpolated between two minority rows of the input.
    Synthetic { base: usize, neighbor: usize },
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub provenance: Vec<Provenance>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Oversamples the minority class until both classes are the same size.
/// Originals come first, unchanged; each synthetic row lies on the segment
/// between a minority row and one of its `k` nearest minority neighbours.
pub fn smote<R: Rng>(x: &[Vec<f64>], y: &[bool], k: usize, rng: &mut R) -> Result<SmoteOutput> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    let mut out = SmoteOutput {
        x: x.to_vec(),
        y: y.to_vec(),
        provenance: (0..x.len()).map(Provenance::Original).collect(),
    };
    if pos.len() == neg.len() {
        return Ok(out);
    }
    let deficit = pos.len().abs_diff(neg.len());
    let (minority, label) = if pos.len() < neg.len() { (pos, true) } else { (neg, false) };
    if minority.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "SMOTE needs at least 2 minority samples, found {}",
            minority.len()
        )));
    }
    let k_eff = if k >= minority.len() {
        log::warn!("SMOTE k={k} clipped to {} (minority size {})", minority.len() - 1, minority.len());
        minority.len() - 1
    } else {
        k.max(1)
    };

    let neighbours: Vec<Vec<usize>> = minority
        .iter()
        .map(|&a| {
            let mut d: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (sq_dist(&x[a], &x[b]), b))
                .collect();
            d.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            d.truncate(k_eff);
            d.into_iter().map(|(_, b)| b).collect()
        })
        .collect();

    for _ in 0..deficit {
        let slot = rng.random_range(0..minority.len());
        let base = minority[slot];
        let neighbor = neighbours[slot][rng.random_range(0..k_eff)];
        let gap: f64 = rng.random();
        let row = x[base]
            .iter()
            .zip(&x[neighbor])
            .map(|(a, b)| a + gap * (b - a))
            .collect();
        out.x.push(row);
        out.y.push(label);
        out.provenance.push(Provenance::Synthetic { base, neighbor });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn balanced_input_unchanged() {
        let x = vec![vec![0.0], vec![1.0]];
        let out = smote(&x, &[true, false], 5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.x, x);
    }

    #[test]
    fn diagonal_minority() {
        let mut x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let mut y = vec![true, true];
        for i in 0..6 {
            x.push(vec![5.0 + i as f64, -3.0]);
            y.push(false);
        }
        let out = smote(&x, &y, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(out.y.iter().filter(|&&v| v).count(), 6);
        for (row, p) in out.x.iter().zip(&out.provenance) {
            if let Provenance::Synthetic { .. } = p {
                assert!((row[0] - row[1]).abs() < 1e-9);
                assert!((0.0..=1.0).contains(&row[0]));
            }
        }
    }

    #[test]
    fn ninety_ten_becomes_ninety_ninety() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..100).map(|i| i < 10).collect();
        let out = smote(&x, &y, 5, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(out.y.iter().filter(|&&v| v).count(), 90);
        assert_eq!(out.y.iter().filter(|&&v| !v).count(), 90);
        assert_eq!(&out.x[..100], &x[..]);
    }

    #[test]
    fn lone_minority_errors() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(smote(&x, &[true, false, false], 5, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
