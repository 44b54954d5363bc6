use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect()
}

/// Forward real FFT of a fixed length, returning the one-sided spectrum
/// (`len / 2 + 1` bins).
pub struct RealFft {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl RealFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        RealFft {
            fft: planner.plan_fft_forward(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spectrum(&self, frame: &[f64]) -> Vec<Complex<f64>> {
        debug_assert_eq!(frame.len(), self.len);
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        buf.truncate(self.len / 2 + 1);
        buf
    }

    pub fn magnitude(&self, frame: &[f64]) -> Vec<f64> {
        self.spectrum(frame).iter().map(|c| c.norm()).collect()
    }
}

/// Frequency in Hz of each one-sided bin.
pub fn bin_frequencies(n_fft: usize, rate: f64) -> Vec<f64> {
    (0..=n_fft / 2).map(|k| k as f64 * rate / n_fft as f64).collect()
}
