use crate::error::{Error, Result};

pub const JS_BINS: usize = 50;
pub const JS_EPS: f64 = 1e-10;

fn histogram(values: &[f64], lo: f64, width: f64, n_bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; n_bins];
    for &v in values {
        let b = if width > 0.0 {
            (((v - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        h[b] += 1.0;
    }
    let n = values.len() as f64;
    let norm = 1.0 + n_bins as f64 * JS_EPS;
    h.iter().map(|c| (c / n + JS_EPS) / norm).collect()
}

fn kl2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).log2()).sum()
}

/// Base-2 Jensen-Shannon divergence between the histograms of two samples
/// over their pooled min-max range, in `[0, 1]`.
pub fn jensen_shannon(a: &[f64], b: &[f64], n_bins: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("Jensen-Shannon needs two non-empty samples".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter("n_bins must be positive".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Jensen-Shannon input".into()));
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let p = histogram(a, lo, width, n_bins);
    let q = histogram(b, lo, width, n_bins);
    let m: Vec<f64> = p.iter().zip(&q).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok((0.5 * (kl2(&p, &m) + kl2(&q, &m))).clamp(0.0, 1.0))
}

/// Per-feature Jensen-Shannon divergence between two row sets, averaged
/// over features.
pub fn mean_js_divergence(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("Jensen-Shannon needs two non-empty row sets".into()));
    }
    let d = a[0].len();
    if d == 0 {
        return Err(Error::EmptyInput("no features".into()));
    }
    let mut total = 0.0;
    for j in 0..d {
        let ca: Vec<f64> = a.iter().map(|r| r[j]).collect();
        let cb: Vec<f64> = b.iter().map(|r| r[j]).collect();
        total += jensen_shannon(&ca, &cb, JS_BINS)?;
    }
    Ok(total / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(jensen_shannon(&a, &a, 50).unwrap() < 1e-9);
        let b: Vec<f64> = a.iter().map(|v| v + 1000.0).collect();
        assert!((jensen_shannon(&a, &b, 50).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(jensen_shannon(&[2.0; 5], &[2.0; 3], 50).unwrap(), 0.0);
        assert!(jensen_shannon(&[], &a, 50).is_err());
    }
}
