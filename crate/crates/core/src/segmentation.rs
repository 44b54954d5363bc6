//! Cough event segmentation by a debounced hysteresis comparator on signal
//! power, plus the per-recording SNR estimate derived from it.

use serde::{Deserialize, Serialize};

use crate::dataset::AudioSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    /// Closing threshold, as a multiple of the mean signal power.
    pub lower_mult: f64,
    /// Opening threshold, as a multiple of the mean signal power.
    pub upper_mult: f64,
    /// A crossing must persist this long to flip the comparator.
    pub tolerance_ms: f64,
    /// Candidates shorter than this are dropped.
    pub min_cough_ms: f64,
    /// Padding added on both sides of each surviving candidate.
    pub pad_ms: f64,
    /// Width of the moving average that turns the squared signal into a
    /// short-time power envelope.
    pub power_window_ms: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            lower_mult: 0.1,
            upper_mult: 2.0,
            tolerance_ms: 10.0,
            min_cough_ms: 200.0,
            pad_ms: 200.0,
            power_window_ms: 10.0,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower_mult < self.upper_mult) || self.lower_mult < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= lower_mult < upper_mult, got {} and {}",
                self.lower_mult, self.upper_mult
            )));
        }
        if !(self.tolerance_ms > 0.0
            && self.min_cough_ms > 0.0
            && self.pad_ms > 0.0
            && self.power_window_ms > 0.0)
        {
            return Err(Error::InvalidParameter(
                "segmentation durations must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Durations converted to sample counts at `rate` (at least one sample).
    pub fn in_samples(&self, rate: u32) -> SampleParams {
        let conv = |ms: f64| ((ms * rate as f64 / 1000.0).round() as usize).max(1);
        SampleParams {
            tolerance: conv(self.tolerance_ms),
            min_len: conv(self.min_cough_ms),
            pad: conv(self.pad_ms),
            power_window: conv(self.power_window_ms),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleParams {
    pub tolerance: usize,
    pub min_len: usize,
    pub pad: usize,
    pub power_window: usize,
}

/// Half-open sample span `[start, end)` of one cough within a recording.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoughSegment {
    pub recording_uuid: String,
    pub start: usize,
    pub end: usize,
}

impl CoughSegment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn slice<'a>(&self, samples: &'a [f64]) -> &'a [f64] {
        &samples[self.start..self.end]
    }
}

/// Centered moving average of `x^2` over `window` samples, truncated at the
/// signal edges.
pub fn power_envelope(samples: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut prefix = Vec::with_capacity(samples.len() + 1);
    prefix.push(0.0);
    for x in samples {
        prefix.push(prefix.last().unwrap() + x * x);
    }
    let half = window / 2;
    (0..samples.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (lo + window).min(samples.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Power thresholds `(lower, upper)` relative to the mean of the squared signal.
pub fn power_thresholds(samples: &[f64], params: &SegmentationParams) -> (f64, f64) {
    let mean_power = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    (params.lower_mult * mean_power, params.upper_mult * mean_power)
}

/// Length of the run of `true` starting at each index.
fn run_lengths(flags: &[bool]) -> Vec<usize> {
    let mut runs = vec![0; flags.len() + 1];
    for i in (0..flags.len()).rev() {
        runs[i] = if flags[i] { runs[i + 1] + 1 } else { 0 };
    }
    runs.truncate(flags.len());
    runs
}

/// Raw comparator candidates as `(start, end)` sample spans, before the
/// duration filter and padding.
pub fn hysteresis_candidates(samples: &[f64], params: &SegmentationParams, rate: u32) -> Vec<(usize, usize)> {
    let sp = params.in_samples(rate);
    let (lower, upper) = power_thresholds(samples, params);
    let envelope = power_envelope(samples, sp.power_window);
    let above: Vec<bool> = envelope.iter().map(|&p| p > upper).collect();
    let below: Vec<bool> = envelope.iter().map(|&p| p < lower).collect();
    let above_run = run_lengths(&above);
    let below_run = run_lengths(&below);

    let n = samples.len();
    let mut out = Vec::new();
    let mut pos = 0;
    // The first index whose forward run reaches the tolerance is where a
    // debounced crossing begins.
    while let Some(onset) = (pos..n).find(|&i| above_run[i] >= sp.tolerance) {
        let search_from = onset + sp.tolerance;
        match (search_from..n).find(|&i| below_run[i] >= sp.tolerance) {
            Some(offset) => {
                out.push((onset, offset));
                pos = offset + sp.tolerance;
            }
            None => {
                out.push((onset, n));
                break;
            }
        }
    }
    out
}

/// Drops short candidates, pads survivors, clips to the signal and merges
/// overlapping spans.
pub fn finalize_candidates(candidates: &[(usize, usize)], n: usize, sp: SampleParams) -> Vec<(usize, usize)> {
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for &(s, e) in candidates {
        if e - s < sp.min_len {
            continue;
        }
        let start = s.saturating_sub(sp.pad);
        let end = (e + sp.pad).min(n);
        match merged.last_mut() {
            Some(last) if start <= last.1 => last.1 = last.1.max(end),
            _ => merged.push((start, end)),
        }
    }
    merged
}

/// Splits a normalized recording at the canonical rate into cough segments.
pub fn segment_coughs(signal: &AudioSignal, params: &SegmentationParams, uuid: &str) -> Vec<CoughSegment> {
    let rate = signal.sample_rate();
    let candidates = hysteresis_candidates(signal.samples(), params, rate);
    finalize_candidates(&candidates, signal.len(), params.in_samples(rate))
        .into_iter()
        .map(|(start, end)| CoughSegment {
            recording_uuid: uuid.to_string(),
            start,
            end,
        })
        .collect()
}

/// `20 log10(rms(cough samples) / rms(non-cough samples))`.
///
/// Returns `+inf` when the non-cough part is digitally silent.
pub fn estimate_snr(signal: &AudioSignal, segments: &[CoughSegment]) -> Result<f64> {
    if segments.is_empty() {
        return Err(Error::UndefinedSnr("no cough segments".into()));
    }
    let x = signal.samples();
    let mut inside = vec![false; x.len()];
    for s in segments {
        if s.end > x.len() || s.start >= s.end {
            return Err(Error::InvalidParameter(format!(
                "segment {}..{} out of bounds for {} samples",
                s.start,
                s.end,
                x.len()
            )));
        }
        inside[s.start..s.end].iter_mut().for_each(|f| *f = true);
    }
    let (mut sig_e, mut sig_n, mut noise_e, mut noise_n) = (0.0, 0usize, 0.0, 0usize);
    for (v, &is_cough) in x.iter().zip(&inside) {
        if is_cough {
            sig_e += v * v;
            sig_n += 1;
        } else {
            noise_e += v * v;
            noise_n += 1;
        }
    }
    if noise_n == 0 {
        return Err(Error::UndefinedSnr("segments cover the whole signal".into()));
    }
    let sig_rms = (sig_e / sig_n as f64).sqrt();
    let noise_rms = (noise_e / noise_n as f64).sqrt();
    if noise_rms == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (sig_rms / noise_rms).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn burst_signal(burst_ms: f64, seed: u64) -> AudioSignal {
        let rate = 12000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3 * rate;
        let half = (burst_ms / 1000.0 * rate as f64 / 2.0) as usize;
        let center = n / 2;
        let s = (0..n)
            .map(|i| {
                let noise = 0.01 * (rng.random::<f64>() * 2.0 - 1.0);
                if i >= center - half && i < center + half {
                    0.8 * (2.0 * std::f64::consts::PI * 700.0 * i as f64 / rate as f64).sin() + noise
                } else {
                    noise
                }
            })
            .collect();
        AudioSignal::new(s, rate as u32).unwrap()
    }

    #[test]
    fn silence_yields_no_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..36000).map(|_| 1e-6 * (rng.random::<f64>() - 0.5)).collect();
        let sig = AudioSignal::new(s, 12000).unwrap();
        assert!(segment_coughs(&sig, &SegmentationParams::default(), "x").is_empty());
    }

    #[test]
    fn single_burst_padded() {
        let sig = burst_signal(300.0, 7);
        let segs = segment_coughs(&sig, &SegmentationParams::default(), "x");
        assert_eq!(segs.len(), 1);
        let (burst_start, burst_end) = (18000 - 1800, 18000 + 1800);
        let tol = 120;
        assert!((segs[0].start as i64 - (burst_start - 2400) as i64).abs() <= tol);
        assert!((segs[0].end as i64 - (burst_end + 2400) as i64).abs() <= tol);
        let snr = estimate_snr(&sig, &segs).unwrap();
        assert!(snr > 5.0, "{snr}");
    }

    #[test]
    fn short_burst_discarded() {
        let sig = burst_signal(100.0, 7);
        assert!(segment_coughs(&sig, &SegmentationParams::default(), "x").is_empty());
    }

    #[test]
    fn snr_closed_form() {
        let mut x = vec![0.1; 100];
        x[10..20].iter_mut().for_each(|v| *v = 1.0);
        let sig = AudioSignal::new(x, 1000).unwrap();
        let seg = CoughSegment { recording_uuid: "r".into(), start: 10, end: 20 };
        assert!((estimate_snr(&sig, &[seg]).unwrap() - 20.0).abs() < 1e-12);

        let sig = AudioSignal::new(vec![0.5; 100], 1000).unwrap();
        let seg = CoughSegment { recording_uuid: "r".into(), start: 0, end: 40 };
        assert!(estimate_snr(&sig, &[seg]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn snr_errors() {
        let sig = AudioSignal::new(vec![0.5; 100], 1000).unwrap();
        assert!(estimate_snr(&sig, &[]).is_err());
        let all = CoughSegment { recording_uuid: "r".into(), start: 0, end: 100 };
        assert!(matches!(estimate_snr(&sig, &[all]), Err(Error::UndefinedSnr(_))));
    }

    #[test]
    fn overlapping_padded_candidates_merge() {
        let sp = SampleParams { tolerance: 1, min_len: 10, pad: 5, power_window: 1 };
        let merged = finalize_candidates(&[(0, 12), (20, 40), (60, 62), (100, 130)], 132, sp);
        assert_eq!(merged, vec![(0, 45), (95, 132)]);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = SegmentationParams { lower_mult: 3.0, ..Default::default() };
        assert!(p.validate().is_err());
        assert!(SegmentationParams::default().validate().is_ok());
    }
}
