//! Tree-structured Parzen Estimator search (maximization).
//!
//! Each dimension is modelled independently. Continuous dimensions use a
//! mixture of truncated Gaussians centred on past trials plus one uniform
//! prior component, in log coordinates for log-uniform dimensions;
//! categorical dimensions use add-one smoothed frequencies.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Dim {
    LogUniform { lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
    Categorical { options: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub dim: Dim,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<Param>,
}

impl SearchSpace {
    pub fn new() -> Self {
        SearchSpace::default()
    }

    pub fn log_uniform(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.params.push(Param { name: name.into(), dim: Dim::LogUniform { lo, hi } });
        self
    }

    pub fn uniform(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.params.push(Param { name: name.into(), dim: Dim::Uniform { lo, hi } });
        self
    }

    pub fn categorical(mut self, name: &str, options: &[&str]) -> Self {
        self.params.push(Param {
            name: name.into(),
            dim: Dim::Categorical { options: options.iter().map(|s| s.to_string()).collect() },
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.params {
            let ok = match &p.dim {
                Dim::LogUniform { lo, hi } => *lo > 0.0 && lo < hi && hi.is_finite(),
                Dim::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
                Dim::Categorical { options } => !options.is_empty(),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("search dimension `{}` is invalid", p.name)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, config: &[ParamValue]) -> bool {
        config.len() == self.params.len()
            && self.params.iter().zip(config).all(|(p, v)| match (&p.dim, v) {
                (Dim::LogUniform { lo, hi } | Dim::Uniform { lo, hi }, ParamValue::Real(x)) => {
                    x >= lo && x <= hi
                }
                (Dim::Categorical { options }, ParamValue::Choice(i)) => *i < options.len(),
                _ => false,
            })
    }

    /// Human-readable value of dimension `i` in `config`.
    pub fn format_value(&self, i: usize, value: &ParamValue) -> String {
        match (&self.params[i].dim, value) {
            (Dim::Categorical { options }, ParamValue::Choice(c)) => options[*c].clone(),
            (_, ParamValue::Real(x)) => format!("{x}"),
            (_, ParamValue::Choice(c)) => format!("{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Real(f64),
    Choice(usize),
}

impl ParamValue {
    pub fn real(&self) -> f64 {
        match self {
            ParamValue::Real(x) => *x,
            ParamValue::Choice(c) => *c as f64,
        }
    }

    pub fn choice(&self) -> usize {
        match self {
            ParamValue::Choice(c) => *c,
            ParamValue::Real(x) => *x as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub number: usize,
    pub config: Vec<ParamValue>,
    /// Mean objective; `-inf` marks a failed trial.
    pub objective: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TpeSettings {
    pub gamma: f64,
    pub n_startup: usize,
    pub n_candidates: usize,
}

impl Default for TpeSettings {
    fn default() -> Self {
        TpeSettings {
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
        }
    }
}

impl TpeSettings {
    /// Settings that never leave the random startup phase.
    pub fn random_search() -> Self {
        TpeSettings {
            n_startup: usize::MAX,
            ..Default::default()
        }
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Parzen estimator over one continuous dimension in transformed coordinates.
struct Parzen {
    lo: f64,
    hi: f64,
    mus: Vec<f64>,
    sigma: f64,
    /// Truncation mass of each kernel inside `[lo, hi]`.
    mass: Vec<f64>,
}

impl Parzen {
    fn new(obs: Vec<f64>, lo: f64, hi: f64) -> Parzen {
        let width = hi - lo;
        let n = obs.len();
        let sigma = if n == 0 {
            width
        } else {
            let m = obs.iter().sum::<f64>() / n as f64;
            let sd = (obs.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
            // Scott's rule, floored so that a cluster of repeated trials
            // cannot collapse the kernel onto a single point.
            let floor = width / (n as f64 + 1.0).min(100.0);
            (sd * (n as f64).powf(-0.2)).clamp(floor, width)
        };
        let mass = obs
            .iter()
            .map(|&mu| (std_normal_cdf((hi - mu) / sigma) - std_normal_cdf((lo - mu) / sigma)).max(1e-300))
            .collect();
        Parzen { lo, hi, mus: obs, sigma, mass }
    }

    fn ln_density(&self, t: f64) -> f64 {
        let k = (self.mus.len() + 1) as f64;
        let prior = 1.0 / (self.hi - self.lo);
        let norm = 1.0 / (self.sigma * (2.0 * std::f64::consts::PI).sqrt());
        let kernels: f64 = self
            .mus
            .iter()
            .zip(&self.mass)
            .map(|(mu, z)| {
                let u = (t - mu) / self.sigma;
                norm * (-0.5 * u * u).exp() / z
            })
            .sum();
        ((prior + kernels) / k).ln()
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let pick = rng.random_range(0..=self.mus.len());
        if pick == self.mus.len() {
            return rng.random_range(self.lo..=self.hi);
        }
        let mu = self.mus[pick];
        for _ in 0..100 {
            let z: f64 = rng.sample(StandardNormal);
            let t = mu + self.sigma * z;
            if t >= self.lo && t <= self.hi {
                return t;
            }
        }
        mu.clamp(self.lo, self.hi)
    }
}

fn transform(dim: &Dim, x: f64) -> f64 {
    match dim {
        Dim::LogUniform { .. } => x.ln(),
        _ => x,
    }
}

fn bounds(dim: &Dim) -> (f64, f64) {
    match *dim {
        Dim::LogUniform { lo, hi } => (lo.ln(), hi.ln()),
        Dim::Uniform { lo, hi } => (lo, hi),
        Dim::Categorical { .. } => unreachable!(),
    }
}

fn untransform(dim: &Dim, t: f64) -> f64 {
    match *dim {
        Dim::LogUniform { lo, hi } => t.exp().clamp(lo, hi),
        Dim::Uniform { lo, hi } => t.clamp(lo, hi),
        Dim::Categorical { .. } => unreachable!(),
    }
}

fn sample_uniform<R: Rng>(space: &SearchSpace, rng: &mut R) -> Vec<ParamValue> {
    space
        .params
        .iter()
        .map(|p| match &p.dim {
            Dim::Categorical { options } => ParamValue::Choice(rng.random_range(0..options.len())),
            dim => {
                let (lo, hi) = bounds(dim);
                ParamValue::Real(untransform(dim, rng.random_range(lo..=hi)))
            }
        })
        .collect()
}

fn categorical_probs(obs: &[usize], k: usize) -> Vec<f64> {
    let mut p = vec![1.0; k];
    for &o in obs {
        p[o] += 1.0;
    }
    let total: f64 = p.iter().sum();
    p.iter().map(|v| v / total).collect()
}

/// Proposes the next configuration given the trials so far.
pub fn tpe_suggest<R: Rng>(
    history: &[Trial],
    space: &SearchSpace,
    settings: &TpeSettings,
    rng: &mut R,
) -> Result<Vec<ParamValue>> {
    space.validate()?;
    if !(settings.gamma > 0.0 && settings.gamma <= 1.0) || settings.n_candidates == 0 {
        return Err(Error::InvalidParameter("TPE needs 0 < gamma <= 1 and n_candidates >= 1".into()));
    }
    if history.len() < settings.n_startup.max(1) {
        return Ok(sample_uniform(space, rng));
    }
    let mut order: Vec<&Trial> = history.iter().collect();
    order.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    let n_good = ((settings.gamma * history.len() as f64).ceil() as usize).clamp(1, history.len());
    let (good, bad) = order.split_at(n_good);

    let mut candidates: Vec<Vec<ParamValue>> = vec![Vec::with_capacity(space.params.len()); settings.n_candidates];
    let mut scores = vec![0.0; settings.n_candidates];
    for (d, p) in space.params.iter().enumerate() {
        match &p.dim {
            Dim::Categorical { options } => {
                let l = categorical_probs(&good.iter().map(|t| t.config[d].choice()).collect::<Vec<_>>(), options.len());
                let g = categorical_probs(&bad.iter().map(|t| t.config[d].choice()).collect::<Vec<_>>(), options.len());
                for (cand, score) in candidates.iter_mut().zip(scores.iter_mut()) {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = options.len() - 1;
                    for (i, pi) in l.iter().enumerate() {
                        acc += pi;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    cand.push(ParamValue::Choice(pick));
                    *score += l[pick].ln() - g[pick].ln();
                }
            }
            dim => {
                let (lo, hi) = bounds(dim);
                let obs = |set: &[&Trial]| -> Vec<f64> {
                    set.iter().map(|t| transform(dim, t.config[d].real()).clamp(lo, hi)).collect()
                };
                let l = Parzen::new(obs(good), lo, hi);
                let g = Parzen::new(obs(bad), lo, hi);
                for (cand, score) in candidates.iter_mut().zip(scores.iter_mut()) {
                    let t = l.sample(rng);
                    cand.push(ParamValue::Real(untransform(dim, t)));
                    *score += l.ln_density(t) - g.ln_density(t);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Ok(candidates.swap_remove(best))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub history: Vec<Trial>,
    /// Index into `history` of the best trial (earliest on ties).
    pub best: usize,
}

impl SearchResult {
    pub fn best_trial(&self) -> &Trial {
        &self.history[self.best]
    }

    /// Best objective after each trial.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.history
            .iter()
            .map(|t| {
                best = best.max(t.objective);
                best
            })
            .collect()
    }
}

/// Runs `budget` sequential trials. `objective` returns `(mean, std)` of
/// the score to maximize; an error is logged and recorded as `-inf`.
pub fn optimize<F>(space: &SearchSpace, settings: &TpeSettings, budget: usize, seed: u64, mut objective: F) -> Result<SearchResult>
where
    F: FnMut(&[ParamValue]) -> Result<(f64, f64)>,
{
    if budget == 0 {
        return Err(Error::InvalidParameter("search budget must be at least 1".into()));
    }
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<Trial> = Vec::with_capacity(budget);
    let mut best = 0;
    for number in 0..budget {
        let config = tpe_suggest(&history, space, settings, &mut rng)?;
        let (objective, std) = match objective(&config) {
            Ok((m, s)) if !m.is_nan() => (m, s),
            Ok(_) => {
                log::warn!("trial {number}: objective is NaN");
                (f64::NEG_INFINITY, f64::NAN)
            }
            Err(e) => {
                log::warn!("trial {number} failed: {e}");
                (f64::NEG_INFINITY, f64::NAN)
            }
        };
        history.push(Trial { number, config, objective, std });
        if objective > history[best].objective {
            best = number;
        }
    }
    Ok(SearchResult { history, best })
}

/// `trial,<param names...>,mean_auc,std_auc`.
pub fn write_history_csv(space: &SearchSpace, result: &SearchResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["trial".to_string()];
    header.extend(space.params.iter().map(|p| p.name.clone()));
    header.extend(["mean_auc".to_string(), "std_auc".to_string()]);
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for t in &result.history {
        let mut row = vec![t.number.to_string()];
        row.extend(t.config.iter().enumerate().map(|(i, v)| space.format_value(i, v)));
        row.push(format!("{}", t.objective));
        row.push(format!("{}", t.std));
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
