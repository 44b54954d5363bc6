use serde::{Deserialize, Serialize};

use super::spectrum::{bin_frequencies, hann, RealFft};
use crate::error::{Error, Result};

/// Power spectral density on a uniform frequency grid from 0 to Nyquist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCurve {
    pub freqs_hz: Vec<f64>,
    pub density: Vec<f64>,
}

impl PsdCurve {
    pub fn area(&self) -> f64 {
        trapezoid(&self.freqs_hz, &self.density)
    }

    /// Piecewise-linear interpolation of the density at `f` (inside the grid).
    fn value_at(&self, f: f64) -> f64 {
        let fs = &self.freqs_hz;
        let idx = fs.partition_point(|&g| g <= f).clamp(1, fs.len() - 1);
        let (f0, f1) = (fs[idx - 1], fs[idx]);
        let t = (f - f0) / (f1 - f0);
        self.density[idx - 1] * (1.0 - t) + self.density[idx] * t
    }

    /// Trapezoidal integral of the density over `[lo, hi]`, interpolating
    /// the curve at band edges that fall between grid points.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64> {
        let (gmin, gmax) = (self.freqs_hz[0], *self.freqs_hz.last().unwrap());
        if !(lo < hi) || lo < gmin - 1e-9 || hi > gmax + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "band {lo}..{hi} Hz is outside the PSD grid {gmin}..{gmax} Hz"
            )));
        }
        let (lo, hi) = (lo.max(gmin), hi.min(gmax));
        let mut xs = vec![lo];
        let mut ys = vec![self.value_at(lo)];
        for (&f, &d) in self.freqs_hz.iter().zip(&self.density) {
            if f > lo && f < hi {
                xs.push(f);
                ys.push(d);
            }
        }
        xs.push(hi);
        ys.push(self.value_at(hi));
        Ok(trapezoid(&xs, &ys))
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| (xw[1] - xw[0]) * (yw[0] + yw[1]) / 2.0)
        .sum()
}

/// One-sided Welch PSD with Hann windows of `nperseg` samples and 50% overlap.
pub fn welch_psd(segment: &[f64], rate: f64, nperseg: usize) -> Result<PsdCurve> {
    if segment.len() < nperseg || nperseg < 2 {
        return Err(Error::SegmentTooShort {
            len: segment.len(),
            required: nperseg,
        });
    }
    let hop = nperseg / 2;
    let w = hann(nperseg);
    let wss: f64 = w.iter().map(|v| v * v).sum();
    let fft = RealFft::new(nperseg);
    let n_bins = nperseg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let n_seg = 1 + (segment.len() - nperseg) / hop;
    let mut frame = vec![0.0; nperseg];
    for s in 0..n_seg {
        let start = s * hop;
        let chunk = &segment[start..start + nperseg];
        let mean = chunk.iter().sum::<f64>() / nperseg as f64;
        for ((dst, x), wv) in frame.iter_mut().zip(chunk).zip(&w) {
            *dst = (x - mean) * wv;
        }
        for (a, c) in acc.iter_mut().zip(fft.spectrum(&frame)) {
            *a += c.norm_sqr();
        }
    }
    let scale = 1.0 / (rate * wss * n_seg as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (nperseg.is_multiple_of(2) && k == n_bins - 1) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    Ok(PsdCurve {
        freqs_hz: bin_frequencies(nperseg, rate),
        density,
    })
}

/// Welch PSD scaled to unit trapezoidal area.
pub fn normalized_psd(segment: &[f64], rate: f64, nperseg: usize) -> Result<PsdCurve> {
    let mut psd = welch_psd(segment, rate, nperseg)?;
    let area = psd.area();
    if !(area > 0.0) {
        return Err(Error::ZeroSignal);
    }
    psd.density.iter_mut().for_each(|d| *d /= area);
    Ok(psd)
}

pub fn band_powers(psd: &PsdCurve, bands: &[(f64, f64)]) -> Result<Vec<f64>> {
    bands.iter().map(|&(lo, hi)| psd.integrate(lo, hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn unit_area_and_scale_invariance() {
        let x = noise(8000, 3);
        let psd = normalized_psd(&x, 12000.0, 1024).unwrap();
        assert!((psd.area() - 1.0).abs() < 1e-6);
        assert_eq!(psd.freqs_hz[0], 0.0);
        assert_eq!(*psd.freqs_hz.last().unwrap(), 6000.0);
        let scaled: Vec<f64> = x.iter().map(|v| v * 37.5).collect();
        let psd2 = normalized_psd(&scaled, 12000.0, 1024).unwrap();
        for (a, b) in psd.density.iter().zip(&psd2.density) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn sine_concentrates_near_its_frequency() {
        let x: Vec<f64> = (0..12000).map(|i| (2.0 * PI * 1000.0 * i as f64 / 12000.0).sin()).collect();
        let psd = normalized_psd(&x, 12000.0, 1024).unwrap();
        let near = psd.integrate(950.0, 1050.0).unwrap();
        assert!(near > 0.9, "{near}");
        let bp = band_powers(&psd, &[(1000.0, 1500.0), (400.0, 550.0)]).unwrap();
        assert!(bp[0] > 100.0 * bp[1]);
    }

    #[test]
    fn band_additivity_with_unaligned_edges() {
        let psd = normalized_psd(&noise(5000, 9), 12000.0, 1024).unwrap();
        let full = psd.integrate(0.0, 6000.0).unwrap();
        assert!((full - 1.0).abs() < 1e-6);
        let edges = [0.0, 123.4, 777.7, 1000.0, 2999.9, 6000.0];
        let parts: f64 = edges.windows(2).map(|w| psd.integrate(w[0], w[1]).unwrap()).sum();
        assert!((parts - 1.0).abs() < 1e-6);
    }

    #[test]
    fn out_of_grid_band_rejected() {
        let psd = normalized_psd(&noise(2048, 1), 12000.0, 1024).unwrap();
        assert!(psd.integrate(5000.0, 7000.0).is_err());
        assert!(psd.integrate(500.0, 400.0).is_err());
    }

    #[test]
    fn too_short_rejected() {
        assert!(matches!(
            normalized_psd(&[0.1; 500], 12000.0, 1024),
            Err(Error::SegmentTooShort { .. })
        ));
    }
}
