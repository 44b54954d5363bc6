//! Energy-envelope peak detection over narrow bands.

use super::FeatureConfig;
use crate::dsp::design_butterworth_bandpass;
use crate::error::Result;

/// Band edges `(lo, hi)` in Hz from the config (50 Hz steps over 50..1000 Hz by default).
pub fn eepd_bands(config: &FeatureConfig) -> Vec<(f64, f64)> {
    let mut bands = Vec::new();
    let mut lo = config.eepd_lo_hz;
    while lo + config.eepd_width_hz <= config.eepd_hi_hz + 1e-9 {
        bands.push((lo, lo + config.eepd_width_hz));
        lo += config.eepd_width_hz;
    }
    bands
}

/// Centered moving average of `|x|` over `window` samples.
pub fn smoothed_envelope(x: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v.abs());
    }
    let half = window / 2;
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Local maxima (rising on the left, non-rising on the right) strictly
/// above `threshold`.
pub fn count_peaks(env: &[f64], threshold: f64) -> usize {
    if env.len() < 3 {
        return 0;
    }
    (1..env.len() - 1)
        .filter(|&i| env[i] > threshold && env[i] > env[i - 1] && env[i] >= env[i + 1])
        .count()
}

/// Per-band peak counts of the smoothed energy envelope, divided by the
/// segment duration in seconds.
///
/// The peak threshold is `eepd_peak_rel` times the largest envelope value
/// across all bands, so weak leakage into distant bands does not register.
pub fn eepd(segment: &[f64], rate: f64, config: &FeatureConfig) -> Result<Vec<f64>> {
    let bands = eepd_bands(config);
    let window = (config.eepd_smoothing_ms * rate / 1000.0).round() as usize;
    let mut envelopes = Vec::with_capacity(bands.len());
    for &(lo, hi) in &bands {
        let filt = design_butterworth_bandpass(config.eepd_filter_order, lo, hi, rate)?;
        envelopes.push(smoothed_envelope(&filt.filter(segment), window));
    }
    let global_max = envelopes
        .iter()
        .flat_map(|e| e.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    let duration = segment.len() as f64 / rate;
    if global_max <= 0.0 || duration == 0.0 {
        return Ok(vec![0.0; bands.len()]);
    }
    let threshold = config.eepd_peak_rel * global_max;
    Ok(envelopes
        .iter()
        .map(|e| count_peaks(e, threshold) as f64 / duration)
        .collect())
}
