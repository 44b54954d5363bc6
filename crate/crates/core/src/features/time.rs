pub const TIME_NAMES: [&str; 4] = ["rms_power", "zero_crossing_rate", "crest_factor", "length_s"];

/// RMS, zero crossings per second, crest factor (peak / RMS), and length in seconds.
pub fn time_features(segment: &[f64], rate: f64) -> [f64; 4] {
    if segment.is_empty() {
        return [0.0; 4];
    }
    let n = segment.len() as f64;
    let duration = n / rate;
    let rms = (segment.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    let crossings = segment
        .windows(2)
        .filter(|w| (w[0] < 0.0 && w[1] >= 0.0) || (w[0] >= 0.0 && w[1] < 0.0))
        .count() as f64;
    let peak = segment.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let crest = if rms > 0.0 { peak / rms } else { 0.0 };
    [rms, crossings / duration, crest, duration]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_signal() {
        let f = time_features(&[0.5; 100], 100.0);
        assert!((f[0] - 0.5).abs() < 1e-15);
        assert_eq!(f[1], 0.0);
        assert!((f[2] - 1.0).abs() < 1e-15);
        assert!((f[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crest_factors() {
        let square: Vec<f64> = (0..1000).map(|i| if (i / 10) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((time_features(&square, 1000.0)[2] - 1.0).abs() < 1e-12);
        let sine: Vec<f64> = (0..12000).map(|i| (2.0 * PI * 100.0 * i as f64 / 12000.0).sin()).collect();
        let f = time_features(&sine, 12000.0);
        assert!((f[2] - 2f64.sqrt()).abs() < 1e-3);
        assert!((f[1] - 200.0).abs() <= 1.0, "{}", f[1]);
    }

    #[test]
    fn length_in_seconds() {
        assert!((time_features(&[0.1; 12000], 12000.0)[3] - 1.0).abs() < 1e-15);
    }
}
