use super::spectrum::{bin_frequencies, hann, RealFft};

pub const SPECTRAL_NAMES: [&str; 11] = [
    "dominant_frequency",
    "spectral_centroid",
    "spectral_rolloff",
    "spectral_spread",
    "spectral_skewness",
    "spectral_kurtosis",
    "spectral_bandwidth",
    "spectral_flatness",
    "spectral_std",
    "spectral_slope",
    "spectral_decrease",
];

/// Fraction of total magnitude below the rolloff frequency.
pub const ROLLOFF_FRACTION: f64 = 0.85;
const FLOOR: f64 = 1e-12;

/// Hann-windowed magnitude spectrum of the whole segment with its bin
/// frequencies.
pub fn segment_magnitude(segment: &[f64], rate: f64) -> (Vec<f64>, Vec<f64>) {
    let n = segment.len();
    let w = hann(n);
    let frame: Vec<f64> = segment.iter().zip(&w).map(|(x, w)| x * w).collect();
    let mag = RealFft::new(n).magnitude(&frame);
    (bin_frequencies(n, rate), mag)
}

/// The eleven spectral shape descriptors, in [`SPECTRAL_NAMES`] order,
/// computed from a magnitude spectrum treated as a distribution over frequency.
pub fn spectral_descriptors(freqs: &[f64], mag: &[f64]) -> [f64; 11] {
    let total: f64 = mag.iter().sum();
    let n = mag.len() as f64;
    if total <= FLOOR || mag.len() < 2 {
        return [0.0; 11];
    }

    let dominant = mag
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
        .0;
    let dominant_frequency = freqs[dominant];

    let moment = |f: &dyn Fn(f64) -> f64| -> f64 {
        freqs.iter().zip(mag).map(|(&fr, &m)| f(fr) * m).sum::<f64>() / total
    };
    let centroid = moment(&|f| f);
    let variance = moment(&|f| (f - centroid).powi(2));
    let spread = variance.sqrt();
    let (skewness, kurtosis) = if spread > FLOOR {
        (
            moment(&|f| (f - centroid).powi(3)) / spread.powi(3),
            moment(&|f| (f - centroid).powi(4)) / spread.powi(4),
        )
    } else {
        (0.0, 0.0)
    };
    let bandwidth = moment(&|f| (f - centroid).abs());

    let mut cum = 0.0;
    let mut rolloff = freqs[freqs.len() - 1];
    for (&f, &m) in freqs.iter().zip(mag) {
        cum += m;
        if cum >= ROLLOFF_FRACTION * total {
            rolloff = f;
            break;
        }
    }

    let log_mean = mag.iter().map(|m| m.max(FLOOR).ln()).sum::<f64>() / n;
    let flatness = log_mean.exp() / (total / n);

    let mean_mag = total / n;
    let std = (mag.iter().map(|m| (m - mean_mag).powi(2)).sum::<f64>() / n).sqrt();

    let mean_f = freqs.iter().sum::<f64>() / n;
    let cov: f64 = freqs.iter().zip(mag).map(|(f, m)| (f - mean_f) * (m - mean_mag)).sum();
    let var_f: f64 = freqs.iter().map(|f| (f - mean_f).powi(2)).sum();
    let slope = cov / var_f;

    let tail: f64 = mag[1..].iter().sum();
    let decrease = if tail > FLOOR {
        mag[1..]
            .iter()
            .enumerate()
            .map(|(k, m)| (m - mag[0]) / (k + 1) as f64)
            .sum::<f64>()
            / tail
    } else {
        0.0
    };

    [
        dominant_frequency,
        centroid,
        rolloff,
        spread,
        skewness,
        kurtosis,
        bandwidth,
        flatness,
        std,
        slope,
        decrease,
    ]
}

pub fn spectral_features(segment: &[f64], rate: f64) -> [f64; 11] {
    if segment.is_empty() {
        return [0.0; 11];
    }
    let (freqs, mag) = segment_magnitude(segment, rate);
    spectral_descriptors(&freqs, &mag)
}
