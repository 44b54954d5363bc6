use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_xy, clip_prob, dot, sigmoid, softplus};
use crate::error::{Error, Result};

pub const MAX_NEWTON_ITER: usize = 1000;
/// Stopping tolerance on the gradient max-norm of the objective divided by
/// [`LogisticProblem::scale`].
pub const GRAD_TOL: f64 = 1e-6;
/// Ridge added to the pooled LDA covariance when it is not positive definite.
pub const LDA_FALLBACK_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeight {
    None,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    Lda,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::Lda => "lda",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "logistic_regression" | "lr" => Some(ModelKind::LogisticRegression),
            "lda" => Some(ModelKind::Lda),
            _ => None,
        }
    }
}

/// A model kind together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    LogisticRegression { c: f64, class_weight: ClassWeight },
    Lda { ridge: f64 },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::LogisticRegression { .. } => ModelKind::LogisticRegression,
            ModelSpec::Lda { .. } => ModelKind::Lda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub spec: ModelSpec,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub solver: String,
    pub converged: bool,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// `sigmoid(w.x + b)`, clipped away from 0 and 1.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        clip_prob(sigmoid(self.decision(x)))
    }
}

pub fn fit(spec: &ModelSpec, x: &[Vec<f64>], y: &[bool]) -> Result<LinearModel> {
    match *spec {
        ModelSpec::LogisticRegression { c, class_weight } => fit_logistic(x, y, c, class_weight),
        ModelSpec::Lda { ridge } => fit_lda(x, y, ridge),
    }
}

fn class_counts(y: &[bool]) -> (usize, usize) {
    let pos = y.iter().filter(|&&v| v).count();
    (y.len() - pos, pos)
}

/// Regularized, weighted logistic loss in the form
/// `0.5 |w|^2 + C sum_i s_i [log(1 + e^z_i) - y_i z_i]`, `z = w.x + b`,
/// over the parameter vector `theta = [w..., b]`.
pub struct LogisticProblem<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [bool],
    pub sample_weight: Vec<f64>,
    pub c: f64,
}

impl<'a> LogisticProblem<'a> {
    /// `max(1, C * sum of sample weights)`: dividing the objective by this
    /// turns the data term into a weighted mean.
    pub fn scale(&self) -> f64 {
        (self.c * self.sample_weight.iter().sum::<f64>()).max(1.0)
    }

    pub fn new(x: &'a [Vec<f64>], y: &'a [bool], c: f64, class_weight: ClassWeight) -> Self {
        let (neg, pos) = class_counts(y);
        let n = y.len() as f64;
        let sample_weight = y
            .iter()
            .map(|&label| match class_weight {
                ClassWeight::None => 1.0,
                ClassWeight::Balanced => n / (2.0 * if label { pos } else { neg } as f64),
            })
            .collect();
        LogisticProblem { x, y, sample_weight, c }
    }

    fn z(&self, theta: &[f64], row: &[f64]) -> f64 {
        let d = row.len();
        dot(&theta[..d], row) + theta[d]
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = theta.len() - 1;
        let reg = 0.5 * dot(&theta[..d], &theta[..d]);
        let data: f64 = self
            .x
            .iter()
            .zip(self.y)
            .zip(&self.sample_weight)
            .map(|((row, &yi), s)| {
                let z = self.z(theta, row);
                s * (softplus(z) - if yi { z } else { 0.0 })
            })
            .sum();
        reg + self.c * data
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = theta.len() - 1;
        let mut g = vec![0.0; d + 1];
        for ((row, &yi), s) in self.x.iter().zip(self.y).zip(&self.sample_weight) {
            let r = s * (sigmoid(self.z(theta, row)) - if yi { 1.0 } else { 0.0 });
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += r * xj;
            }
            g[d] += r;
        }
        for (j, gj) in g.iter_mut().enumerate() {
            *gj *= self.c;
            if j < d {
                *gj += theta[j];
            }
        }
        g
    }

    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let d = theta.len() - 1;
        let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
        let mut xa = vec![1.0; d + 1];
        for (row, s) in self.x.iter().zip(&self.sample_weight) {
            let p = sigmoid(self.z(theta, row));
            let w = self.c * s * p * (1.0 - p);
            if w == 0.0 {
                continue;
            }
            xa[..d].copy_from_slice(row);
            for a in 0..=d {
                let wa = w * xa[a];
                for b in a..=d {
                    h[(a, b)] += wa * xa[b];
                }
            }
        }
        for a in 0..=d {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
            if a < d {
                h[(a, a)] += 1.0;
            }
        }
        h
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton (IRLS) minimization of [`LogisticProblem`].
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], c: f64, class_weight: ClassWeight) -> Result<LinearModel> {
    let d = check_xy(x, y)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let (neg, pos) = class_counts(y);
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass("logistic regression needs both classes".into()));
    }
    let problem = LogisticProblem::new(x, y, c, class_weight);
    let mut theta = vec![0.0; d + 1];
    let mut f = problem.value(&theta);
    let mut g = problem.gradient(&theta);
    let tol = GRAD_TOL * problem.scale();
    let mut converged = false;
    for _ in 0..MAX_NEWTON_ITER {
        let gmax = max_abs(&g);
        if gmax < tol {
            converged = true;
            break;
        }
        let mut h = problem.hessian(&theta);
        let rhs = DVector::from_column_slice(&g);
        let step = loop {
            if let Some(ch) = h.clone().cholesky() {
                break ch.solve(&rhs);
            }
            // The bias row can be numerically flat when every sample saturates.
            for a in 0..=d {
                h[(a, a)] += 1e-10 * (1.0 + h[(a, a)].abs());
            }
        };
        let slope: f64 = -dot(&g, step.as_slice());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t - alpha * s).collect();
            let fc = problem.value(&cand);
            if fc <= f + 1e-4 * alpha * slope {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        let (cand, fc) = match accepted {
            Some(v) => v,
            None => {
                // Near the optimum the loss difference drowns in rounding; a
                // full step that still shrinks the gradient is kept.
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t - s).collect();
                let gc = problem.gradient(&cand);
                if max_abs(&gc) < gmax {
                    let fc = problem.value(&cand);
                    (cand, fc)
                } else {
                    break;
                }
            }
        };
        theta = cand;
        f = fc;
        g = problem.gradient(&theta);
    }
    if !converged && max_abs(&g) < tol {
        converged = true;
    }
    if !converged {
        log::warn!(
            "logistic regression (C={c}) stopped with scaled gradient max-norm {:.3e}",
            max_abs(&g) / problem.scale()
        );
    }
    let bias = theta[d];
    theta.truncate(d);
    Ok(LinearModel {
        spec: ModelSpec::LogisticRegression { c, class_weight },
        weights: theta,
        bias,
        solver: "newton".into(),
        converged,
    })
}

/// Two-class LDA with pooled within-class covariance plus `ridge * I`.
pub fn fit_lda(x: &[Vec<f64>], y: &[bool], ridge: f64) -> Result<LinearModel> {
    let d = check_xy(x, y)?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidParameter(format!("ridge must be non-negative, got {ridge}")));
    }
    let (n0, n1) = class_counts(y);
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass("LDA needs both classes".into()));
    }
    let mut mu = [vec![0.0; d], vec![0.0; d]];
    for (row, &yi) in x.iter().zip(y) {
        for (m, v) in mu[yi as usize].iter_mut().zip(row) {
            *m += v;
        }
    }
    mu[0].iter_mut().for_each(|m| *m /= n0 as f64);
    mu[1].iter_mut().for_each(|m| *m /= n1 as f64);

    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for (row, &yi) in x.iter().zip(y) {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mu[yi as usize]) {
            *c = v - m;
        }
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += centered[a] * centered[b];
            }
        }
    }
    let dof = (x.len() as f64 - 2.0).max(1.0);
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    cov /= dof;
    for a in 0..d {
        cov[(a, a)] += ridge;
    }

    let diff = DVector::from_iterator(d, mu[1].iter().zip(&mu[0]).map(|(a, b)| a - b));
    let mut extra = 0.0;
    let solved = loop {
        let mut m = cov.clone();
        for a in 0..d {
            m[(a, a)] += extra;
        }
        if let Some(ch) = m.cholesky() {
            break ch.solve(&diff);
        }
        extra = if extra == 0.0 { LDA_FALLBACK_RIDGE } else { extra * 10.0 };
        if extra > 1e6 {
            return Err(Error::NonFinite("LDA covariance could not be regularized".into()));
        }
    };
    let weights: Vec<f64> = solved.iter().copied().collect();
    let midpoint: Vec<f64> = mu[0].iter().zip(&mu[1]).map(|(a, b)| 0.5 * (a + b)).collect();
    let bias = -dot(&weights, &midpoint) + (n1 as f64 / n0 as f64).ln();
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::NonFinite("LDA weights".into()));
    }
    Ok(LinearModel {
        spec: ModelSpec::Lda { ridge },
        weights,
        bias,
        solver: if extra > 0.0 { "cholesky+ridge".into() } else { "cholesky".into() },
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_classes(n: usize, d: usize, shift: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % 2 == 0;
            let row: Vec<f64> = (0..d)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    z + if label && j == 0 { shift } else { 0.0 }
                })
                .collect();
            x.push(row);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn mirrored_data_gives_zero_model() {
        let (x, y) = gaussian_classes(40, 3, 1.0, 3);
        let mut xm = x.clone();
        let mut ym = y.clone();
        xm.extend(x.iter().map(|r| r.iter().map(|v| -v).collect::<Vec<_>>()));
        ym.extend(y.iter().map(|v| !v));
        // (X, y) + (-X, 1 - y) makes the loss even in the bias only.
        let m = fit_logistic(&xm, &ym, 1.0, ClassWeight::None).unwrap();
        assert!(m.bias.abs() < 1e-6);

        // Every row with both labels, plus its negation: the origin is optimal.

        let mut xs = x.clone();
        let mut ys = y.clone();
        xs.extend(x.iter().cloned());
        ys.extend(y.iter().map(|v| !v));
        xs.extend(x.iter().map(|r| r.iter().map(|v| -v).collect::<Vec<_>>()));
        ys.extend(y.iter().copied());
        xs.extend(x.iter().map(|r| r.iter().map(|v| -v).collect::<Vec<_>>()));
        ys.extend(y.iter().map(|v| !v));
        let m = fit_logistic(&xs, &ys, 1.0, ClassWeight::Balanced).unwrap();
        assert!(m.converged);
        assert!(m.weights.iter().all(|w| w.abs() < 1e-6));
        assert!(m.bias.abs() < 1e-6);
    }

    #[test]
    fn separable_1d_has_positive_weight() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 9.5]).collect();
        let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let m = fit_logistic(&x, &y, 1.0, ClassWeight::None).unwrap();
        assert!(m.converged);
        assert!(m.weights[0] > 0.0);
        let probs: Vec<f64> = x.iter().map(|r| m.predict_proba(r)).collect();
        assert!(probs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let (x, y) = gaussian_classes(200, 4, 1.5, 11);
        for cw in [ClassWeight::None, ClassWeight::Balanced] {
            let m = fit_logistic(&x, &y, 0.5, cw).unwrap();
            let p = LogisticProblem::new(&x, &y, 0.5, cw);
            let mut theta = m.weights.clone();
            theta.push(m.bias);
            assert!(max_abs(&p.gradient(&theta)) < GRAD_TOL * p.scale());
        }
    }

    #[test]
    fn lda_boundary_is_perpendicular_bisector() {
        let (x, y) = gaussian_classes(4000, 2, 2.0, 5);
        let m = fit_lda(&x, &y, 0.0).unwrap();
        // weight direction along the mean difference, boundary near x0 = 1
        assert!(m.weights[1].abs() < 0.1 * m.weights[0].abs());
        let x0 = -m.bias / m.weights[0];
        assert!((x0 - 1.0).abs() < 0.1, "{x0}");
    }

    #[test]
    fn lda_handles_duplicated_feature() {
        let (x, y) = gaussian_classes(100, 2, 1.0, 9);
        let x: Vec<Vec<f64>> = x.into_iter().map(|r| vec![r[0], r[0], r[1]]).collect();
        let m = fit_lda(&x, &y, 0.0).unwrap();
        assert!(m.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(fit_logistic(&x, &[true, true], 1.0, ClassWeight::None), Err(Error::SingleClass(_))));
        assert!(matches!(fit_lda(&x, &[false, false], 0.0), Err(Error::SingleClass(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let x = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(fit_logistic(&x, &[true, false], 1.0, ClassWeight::None), Err(Error::NonFinite(_))));
    }
}
