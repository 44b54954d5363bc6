use std::f64::consts::PI;

use super::spectrum::{bin_frequencies, hann, RealFft};
use super::FeatureConfig;
use crate::error::{Error, Result};

/// Floor applied to mel energies before the log.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters on the HTK mel scale spanning 0..Nyquist, evaluated
/// at the FFT bin frequencies. Returns `n_mels` rows of `n_fft/2 + 1` weights.
pub fn mel_filterbank(n_mels: usize, n_fft: usize, rate: f64) -> Vec<Vec<f64>> {
    let freqs = bin_frequencies(n_fft, rate);
    let max_mel = hz_to_mel(rate / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(max_mel * i as f64 / (n_mels + 1) as f64))
        .collect();
    (0..n_mels)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            freqs
                .iter()
                .map(|&f| {
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= center {
                        (f - lo) / (center - lo)
                    } else {
                        (hi - f) / (hi - center)
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of `x`, first `n_out` coefficients.
pub fn dct2(x: &[f64], n_out: usize) -> Vec<f64> {
    let m = x.len() as f64;
    (0..n_out)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * k as f64 * (i as f64 + 0.5) / m).cos())
                .sum();
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            s * scale
        })
        .collect()
}

/// Per-frame MFCCs: Hann-windowed magnitude spectrum -> mel filterbank ->
/// natural log -> DCT-II. Coefficient 0 is included.
pub fn mfcc_frames(segment: &[f64], rate: f64, config: &FeatureConfig) -> Result<Vec<Vec<f64>>> {
    let frame_len = config.frame_len;
    if segment.len() < frame_len {
        return Err(Error::SegmentTooShort {
            len: segment.len(),
            required: frame_len,
        });
    }
    let window = hann(frame_len);
    let fft = RealFft::new(frame_len);
    let bank = mel_filterbank(config.n_mels, frame_len, rate);
    let n_frames = 1 + (segment.len() - frame_len) / config.hop_len;
    let mut frame = vec![0.0; frame_len];
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * config.hop_len;
        for (dst, (x, w)) in frame
            .iter_mut()
            .zip(segment[start..start + frame_len].iter().zip(&window))
        {
            *dst = x * w;
        }
        let mag = fft.magnitude(&frame);
        let log_mel: Vec<f64> = bank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().zip(&mag).map(|(w, m)| w * m).sum();
                e.max(LOG_FLOOR).ln()
            })
            .collect();
        out.push(dct2(&log_mel, config.n_mfcc));
    }
    Ok(out)
}

/// Per-coefficient mean followed by per-coefficient population standard
/// deviation over frames (`2 * n_mfcc` values).
pub fn mfcc_stats(segment: &[f64], rate: f64, config: &FeatureConfig) -> Result<Vec<f64>> {
    let frames = mfcc_frames(segment, rate, config)?;
    let n = frames.len() as f64;
    let k = config.n_mfcc;
    let mut mean = vec![0.0; k];
    for fr in &frames {
        for (m, v) in mean.iter_mut().zip(fr) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; k];
    for fr in &frames {
        for ((s, v), m) in var.iter_mut().zip(fr).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    mean.extend(var.into_iter().map(f64::sqrt));
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 1000.0, 5999.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 999.985_6).abs() < 1e-3);
    }

    #[test]
    fn dct_of_constant_concentrates_in_c0() {
        let c = dct2(&[2.0; 8], 4);
        assert!((c[0] - 2.0 * 8f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn identical_frames_have_zero_std() {
        let cfg = FeatureConfig::default();
        // period of 512 samples, so every hop sees the same frame
        let x: Vec<f64> = (0..4096)
            .map(|i| (2.0 * PI * i as f64 / 512.0).sin() + 0.3 * (2.0 * PI * i as f64 / 128.0).cos())
            .collect();
        let stats = mfcc_stats(&x, 12000.0, &cfg).unwrap();
        assert_eq!(stats.len(), 26);
        assert!(stats[13..].iter().all(|s| s.abs() < 1e-9), "{:?}", &stats[13..]);
    }

    #[test]
    fn dc_segment_is_finite() {
        let stats = mfcc_stats(&[0.5; 3000], 12000.0, &FeatureConfig::default()).unwrap();
        assert!(stats.iter().all(|v| v.is_finite()));
        let zeros = mfcc_stats(&[0.0; 3000], 12000.0, &FeatureConfig::default()).unwrap();
        assert!(zeros.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn too_short_segment_errors() {
        assert!(matches!(
            mfcc_stats(&[0.1; 100], 12000.0, &FeatureConfig::default()),
            Err(Error::SegmentTooShort { .. })
        ));
    }
}
