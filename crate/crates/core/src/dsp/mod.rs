//! Pre-processing: peak normalization, Butterworth low-pass, resampling.

mod filter;
mod resample;

use serde::{Deserialize, Serialize};

pub use filter::{
    apply_filter, design_butterworth_bandpass, design_butterworth_highpass,
    design_butterworth_lowpass, Biquad, BiquadCascade,
};
pub use resample::{resample, KAISER_BETA, KERNEL_TAPS};

use crate::dataset::AudioSignal;
use crate::error::{Error, Result};

/// Divides by the maximum absolute sample so the peak magnitude is 1.
pub fn normalize_peak(signal: &AudioSignal) -> Result<AudioSignal> {
    let peak = signal.samples().iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let out = signal.samples().iter().map(|s| s / peak).collect();
    AudioSignal::new(out, signal.sample_rate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub filter_order: usize,
    pub cutoff_hz: f64,
    pub target_rate: u32,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            filter_order: 4,
            cutoff_hz: 6000.0,
            target_rate: 12000,
        }
    }
}

/// normalize -> low-pass -> resample.
///
/// If the source is already at or below twice the cutoff, the low-pass is
/// skipped since the design would sit at or above Nyquist.
pub fn preprocess(signal: &AudioSignal, config: &PreprocessConfig) -> Result<AudioSignal> {
    let normalized = normalize_peak(signal)?;
    let rate = normalized.sample_rate() as f64;
    let filtered = if config.cutoff_hz < rate / 2.0 {
        let lp = design_butterworth_lowpass(config.filter_order, config.cutoff_hz, rate)?;
        apply_filter(&lp, &normalized)
    } else {
        normalized
    };
    resample(&filtered, config.target_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let s = AudioSignal::new(vec![0.2, -0.4], 8000).unwrap();
        assert_eq!(normalize_peak(&s).unwrap().samples(), &[0.5, -1.0]);
        let n = AudioSignal::new(vec![1.0, -0.25, 0.5], 8000).unwrap();
        assert_eq!(normalize_peak(&n).unwrap(), n);
        let z = AudioSignal::new(vec![0.0; 4], 8000).unwrap();
        assert!(matches!(normalize_peak(&z), Err(Error::ZeroSignal)));
    }

    #[test]
    fn preprocess_reaches_target_rate() {
        let s: Vec<f64> = (0..48000).map(|i| ((i as f64) * 0.05).sin() * 0.3).collect();
        let out = preprocess(&AudioSignal::new(s, 48000).unwrap(), &PreprocessConfig::default()).unwrap();
        assert_eq!(out.sample_rate(), 12000);
        assert_eq!(out.len(), 12000);
    }
}
