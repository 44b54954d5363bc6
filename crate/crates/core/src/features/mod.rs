//! Per-cough feature vectors.
//!
//! Layout (schema version [`FEATURE_SCHEMA_VERSION`]):
//! 13 MFCC means, 13 MFCC standard deviations, 19 EEPD band rates,
//! 11 spectral descriptors, 4 time-domain features, one normalized PSD band
//! power per configured band, then `gender` when enabled.

mod eepd;
mod mfcc;
mod psd;
mod report;
mod spectral;
pub mod spectrum;
mod table;
mod time;

use serde::{Deserialize, Serialize};

pub use eepd::{count_peaks, eepd, eepd_bands, smoothed_envelope};
pub use mfcc::{dct2, hz_to_mel, mel_filterbank, mel_to_hz, mfcc_frames, mfcc_stats, LOG_FLOOR};
pub use psd::{band_powers, normalized_psd, trapezoid, welch_psd, PsdCurve};
pub use report::{class_psd_report, write_psd_csv, write_psd_svg, BandTest, ClassPsd, PsdReport};
pub use spectral::{spectral_descriptors, spectral_features, segment_magnitude, ROLLOFF_FRACTION, SPECTRAL_NAMES};
pub use table::{read_features, write_features, FeatureRow, FeatureTable};
pub use time::{time_features, TIME_NAMES};

use crate::error::{Error, Result};

pub const FEATURE_SCHEMA_VERSION: u32 = 1;
pub const GENDER_FEATURE: &str = "gender";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub frame_len: usize,
    pub hop_len: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub eepd_lo_hz: f64,
    pub eepd_hi_hz: f64,
    pub eepd_width_hz: f64,
    pub eepd_filter_order: usize,
    pub eepd_smoothing_ms: f64,
    pub eepd_peak_rel: f64,
    /// Welch window length for the normalized PSD.
    pub psd_nperseg: usize,
    pub psd_bands: Vec<(f64, f64)>,
    pub include_gender: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            frame_len: 1024,
            hop_len: 512,
            n_mels: 40,
            n_mfcc: 13,
            eepd_lo_hz: 50.0,
            eepd_hi_hz: 1000.0,
            eepd_width_hz: 50.0,
            eepd_filter_order: 4,
            eepd_smoothing_ms: 50.0,
            eepd_peak_rel: 0.1,
            psd_nperseg: 1024,
            psd_bands: vec![(400.0, 550.0), (550.0, 800.0), (1000.0, 1500.0)],
            include_gender: true,
        }
    }
}

fn band_name(prefix: &str, lo: f64, hi: f64) -> String {
    format!("{prefix}_{}_{}", lo.round() as i64, hi.round() as i64)
}

impl FeatureConfig {
    pub fn validate(&self, rate: f64) -> Result<()> {
        let nyquist = rate / 2.0;
        if self.frame_len < 2 || self.hop_len == 0 || self.n_mels == 0 || self.n_mfcc == 0 {
            return Err(Error::InvalidParameter("frame, hop, mel and mfcc sizes must be positive".into()));
        }
        if self.n_mfcc > self.n_mels {
            return Err(Error::InvalidParameter("n_mfcc cannot exceed n_mels".into()));
        }
        if !(self.eepd_width_hz > 0.0 && self.eepd_lo_hz > 0.0 && self.eepd_hi_hz < nyquist) {
            return Err(Error::InvalidParameter("EEPD bands must lie inside (0, Nyquist)".into()));
        }
        for &(lo, hi) in &self.psd_bands {
            if !(lo >= 0.0 && lo < hi && hi <= nyquist) {
                return Err(Error::InvalidParameter(format!(
                    "PSD band {lo}..{hi} Hz must satisfy 0 <= lo < hi <= {nyquist}"
                )));
            }
        }
        Ok(())
    }

    /// Names of the acoustic features (everything except gender), in order.
    pub fn acoustic_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        names.extend((0..self.n_mfcc).map(|i| format!("mfcc_mean_{i}")));
        names.extend((0..self.n_mfcc).map(|i| format!("mfcc_std_{i}")));
        names.extend(eepd_bands(self).into_iter().map(|(lo, hi)| band_name("eepd", lo, hi)));
        names.extend(SPECTRAL_NAMES.iter().map(|s| s.to_string()));
        names.extend(TIME_NAMES.iter().map(|s| s.to_string()));
        names.extend(self.psd_bands.iter().map(|&(lo, hi)| band_name("psd", lo, hi)));
        names
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.acoustic_names();
        if self.include_gender {
            names.push(GENDER_FEATURE.to_string());
        }
        names
    }
}

/// All acoustic features for one cough segment, in
/// [`FeatureConfig::acoustic_names`] order.
pub fn extract_acoustic(segment: &[f64], rate: f64, config: &FeatureConfig) -> Result<Vec<f64>> {
    let mut v = mfcc_stats(segment, rate, config)?;
    v.extend(eepd(segment, rate, config)?);
    v.extend(spectral_features(segment, rate));
    v.extend(time_features(segment, rate));
    let psd = normalized_psd(segment, rate, config.psd_nperseg)?;
    v.extend(band_powers(&psd, &config.psd_bands)?);
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("feature {}", config.acoustic_names()[i])));
    }
    Ok(v)
}
