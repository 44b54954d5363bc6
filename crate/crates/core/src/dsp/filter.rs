use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::AudioSignal;
use crate::error::{Error, Result};

/// Second-order section, normalized so that `a0 = 1`:
/// `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Poles strictly inside the unit circle (Jury conditions for a
    /// second-order denominator).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    pub fn response(&self, omega: f64) -> (f64, f64) {
        // z^-1 = e^{-jw}
        let (c1, s1) = (omega.cos(), -omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), -(2.0 * omega).sin());
        let num = (self.b0 + self.b1 * c1 + self.b2 * c2, self.b1 * s1 + self.b2 * s2);
        let den = (1.0 + self.a1 * c1 + self.a2 * c2, self.a1 * s1 + self.a2 * s2);
        let d = den.0 * den.0 + den.1 * den.1;
        (
            (num.0 * den.0 + num.1 * den.1) / d,
            (num.1 * den.0 - num.0 * den.1) / d,
        )
    }
}

/// Cascade of biquads applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lowpass,
    Highpass,
}

impl BiquadCascade {
    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / sample_rate_hz;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(omega);
                (re * re + im * im).sqrt()
            })
            .product()
    }

    pub fn dc_gain(&self) -> f64 {
        self.sections
            .iter()
            .map(|s| (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2))
            .product()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Filters `input` forward with zero initial state (transposed direct
    /// form II per section).
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut out = input.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for x in out.iter_mut() {
                let y = s.b0 * *x + z1;
                z1 = s.b1 * *x - s.a1 * y + z2;
                z2 = s.b2 * *x - s.a2 * y;
                *x = y;
            }
        }
        out
    }
}

fn design(kind: Kind, order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<BiquadCascade> {
    if order == 0 {
        return Err(Error::InvalidParameter("filter order must be at least 1".into()));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)"
        )));
    }
    // Pre-warped analog cutoff, expressed as the bilinear constant K = tan(w_c / 2).
    let k = (PI * cutoff_hz / sample_rate_hz).tan();
    let k2 = k * k;
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for i in 0..order / 2 {
        // Pole pair at angle theta from the negative real axis; Q = 1 / (2 sin((2i+1)pi / 2N)).
        let q = 1.0 / (2.0 * ((2 * i + 1) as f64 * PI / (2 * order) as f64).sin());
        let norm = 1.0 / (1.0 + k / q + k2);
        let a1 = 2.0 * (k2 - 1.0) * norm;
        let a2 = (1.0 - k / q + k2) * norm;
        let section = match kind {
            Kind::Lowpass => {
                let b0 = k2 * norm;
                Biquad { b0, b1: 2.0 * b0, b2: b0, a1, a2 }
            }
            Kind::Highpass => Biquad {
                b0: norm,
                b1: -2.0 * norm,
                b2: norm,
                a1,
                a2,
            },
        };
        sections.push(section);
    }
    if order % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        let a1 = (k - 1.0) * norm;
        let section = match kind {
            Kind::Lowpass => Biquad { b0: k * norm, b1: k * norm, b2: 0.0, a1, a2: 0.0 },
            Kind::Highpass => Biquad { b0: norm, b1: -norm, b2: 0.0, a1, a2: 0.0 },
        };
        sections.push(section);
    }
    Ok(BiquadCascade { sections })
}

/// Butterworth low-pass by bilinear transform with cutoff pre-warping.
/// The magnitude at `cutoff_hz` is exactly 1/sqrt(2).
pub fn design_butterworth_lowpass(
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
) -> Result<BiquadCascade> {
    design(Kind::Lowpass, order, cutoff_hz, sample_rate_hz)
}

pub fn design_butterworth_highpass(
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
) -> Result<BiquadCascade> {
    design(Kind::Highpass, order, cutoff_hz, sample_rate_hz)
}

/// Band-pass as a high-pass at `lo_hz` followed by a low-pass at `hi_hz`.
pub fn design_butterworth_bandpass(
    order: usize,
    lo_hz: f64,
    hi_hz: f64,
    sample_rate_hz: f64,
) -> Result<BiquadCascade> {
    if lo_hz >= hi_hz {
        return Err(Error::InvalidParameter(format!(
            "band edges must satisfy lo < hi, got {lo_hz}..{hi_hz}"
        )));
    }
    let mut hp = design(Kind::Highpass, order, lo_hz, sample_rate_hz)?;
    let lp = design(Kind::Lowpass, order, hi_hz, sample_rate_hz)?;
    hp.sections.extend(lp.sections);
    Ok(hp)
}

pub fn apply_filter(cascade: &BiquadCascade, signal: &AudioSignal) -> AudioSignal {
    let out = cascade.filter(signal.samples());
    AudioSignal::new(out, signal.sample_rate()).expect("stable filter preserves finiteness")
}
