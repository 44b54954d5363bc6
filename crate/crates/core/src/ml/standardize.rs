use serde::{Deserialize, Serialize};

/// Per-feature mean removal and scaling to unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Features with zero variance on the fit set; their std is stored as 1.
    pub constant: Vec<usize>,
}

impl Standardizer {
    /// Panics on an empty matrix.
    pub fn fit(x: &[Vec<f64>]) -> Standardizer {
        let n = x.len() as f64;
        let d = x[0].len();
        let mut means = vec![0.0; d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for row in x {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let mut constant = Vec::new();
        let stds = vars
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 * means[j].abs().max(1.0) {
                    sd
                } else {
                    constant.push(j);
                    1.0
                }
            })
            .collect();
        Standardizer { means, stds, constant }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std_closed_form() {
        let x = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&x);
        let t = s.transform(&x);
        let expected = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        for (row, e) in t.iter().zip(expected) {
            assert!((row[0] - e).abs() < 1e-12);
            assert_eq!(row[1], 0.0);
        }
        assert_eq!(s.constant, vec![1]);
        assert_eq!(s.transform_row(&[2.0, 5.0]), vec![0.0, 0.0]);
    }
}
