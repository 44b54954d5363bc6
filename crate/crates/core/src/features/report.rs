use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::psd::PsdCurve;
use crate::error::{Error, Result};
use crate::stats::{welch_t_test, TTest};

/// z-value for a two-sided 95% normal interval.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Serialize)]
pub struct ClassPsd {
    pub n_segments: usize,
    pub mean: Vec<f64>,
    /// Half-width of the 95% confidence interval of the mean at each frequency.
    pub ci95: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandTest {
    pub band: (f64, f64),
    pub mean_healthy: f64,
    pub mean_covid: f64,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub ln_p: f64,
}

impl BandTest {
    pub fn log10_p(&self) -> f64 {
        self.ln_p / std::f64::consts::LN_10
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdReport {
    pub freqs_hz: Vec<f64>,
    pub healthy: ClassPsd,
    pub covid: ClassPsd,
    pub bands: Vec<BandTest>,
}

fn class_summary(curves: &[&PsdCurve]) -> ClassPsd {
    let n = curves.len();
    let bins = curves[0].density.len();
    let mut mean = vec![0.0; bins];
    for c in curves {
        for (m, d) in mean.iter_mut().zip(&c.density) {
            *m += d / n as f64;
        }
    }
    let mut var = vec![0.0; bins];
    for c in curves {
        for ((v, d), m) in var.iter_mut().zip(&c.density).zip(&mean) {
            *v += (d - m) * (d - m) / (n as f64 - 1.0);
        }
    }
    let ci95 = var.iter().map(|v| Z_95 * (v / n as f64).sqrt()).collect();
    ClassPsd { n_segments: n, mean, ci95 }
}

/// Per-class mean normalized PSD with 95% intervals, and a Welch t-test per
/// band on per-segment band powers (COVID-19 versus healthy).
pub fn class_psd_report(curves: &[PsdCurve], positive: &[bool], bands: &[(f64, f64)]) -> Result<PsdReport> {
    if curves.len() != positive.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} curves but {} labels",
            curves.len(),
            positive.len()
        )));
    }
    let covid: Vec<&PsdCurve> = curves.iter().zip(positive).filter(|(_, &p)| p).map(|(c, _)| c).collect();
    let healthy: Vec<&PsdCurve> = curves.iter().zip(positive).filter(|(_, &p)| !p).map(|(c, _)| c).collect();
    for (name, class) in [("COVID-19", &covid), ("healthy", &healthy)] {
        if class.len() < 2 {
            return Err(Error::SingleClass(format!(
                "PSD report needs at least 2 {name} segments, found {}",
                class.len()
            )));
        }
    }
    let grid = &curves[0].freqs_hz;
    if curves.iter().any(|c| &c.freqs_hz != grid) {
        return Err(Error::DimensionMismatch("PSD curves use different frequency grids".into()));
    }

    let mut tests = Vec::with_capacity(bands.len());
    for &(lo, hi) in bands {
        let powers = |set: &[&PsdCurve]| -> Result<Vec<f64>> { set.iter().map(|c| c.integrate(lo, hi)).collect() };
        let (pc, ph) = (powers(&covid)?, powers(&healthy)?);
        let TTest { t, df, p_value, ln_p } = welch_t_test(&pc, &ph);
        tests.push(BandTest {
            band: (lo, hi),
            mean_healthy: crate::stats::mean(&ph),
            mean_covid: crate::stats::mean(&pc),
            t,
            df,
            p_value,
            ln_p,
        });
    }

    Ok(PsdReport {
        freqs_hz: grid.clone(),
        healthy: class_summary(&healthy),
        covid: class_summary(&covid),
        bands: tests,
    })
}

/// `freq_hz,mean_healthy,ci_healthy,mean_covid,ci_covid`.
pub fn write_psd_csv(report: &PsdReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["freq_hz", "mean_healthy", "ci_healthy", "mean_covid", "ci_covid"])
        .map_err(|e| Error::csv(path, e))?;
    for i in 0..report.freqs_hz.len() {
        w.write_record(&[
            format!("{}", report.freqs_hz[i]),
            format!("{}", report.healthy.mean[i]),
            format!("{}", report.healthy.ci95[i]),
            format!("{}", report.covid.mean[i]),
            format!("{}", report.covid.ci95[i]),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean curves with shaded 95% bands, up to `max_freq_hz`.
pub fn write_psd_svg(report: &PsdReport, title: &str, max_freq_hz: f64, path: impl AsRef<Path>) -> Result<()> {
    let (w, h, pad) = (800.0, 400.0, 50.0);
    let idx: Vec<usize> = (0..report.freqs_hz.len())
        .filter(|&i| report.freqs_hz[i] <= max_freq_hz)
        .collect();
    let y_max = idx
        .iter()
        .map(|&i| (report.healthy.mean[i] + report.healthy.ci95[i]).max(report.covid.mean[i] + report.covid.ci95[i]))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let x = |f: f64| pad + (w - 2.0 * pad) * f / max_freq_hz;
    let y = |v: f64| h - pad - (h - 2.0 * pad) * (v / y_max).clamp(0.0, 1.0);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(svg, r#"<text x="{}" y="25" text-anchor="middle" font-size="16">{title}</text>"#, w / 2.0);
    for (class, color) in [(&report.healthy, "#1f77b4"), (&report.covid, "#d62728")] {
        let upper: Vec<String> = idx
            .iter()
            .map(|&i| format!("{:.2},{:.2}", x(report.freqs_hz[i]), y(class.mean[i] + class.ci95[i])))
            .collect();
        let lower: Vec<String> = idx
            .iter()
            .rev()
            .map(|&i| format!("{:.2},{:.2}", x(report.freqs_hz[i]), y(class.mean[i] - class.ci95[i])))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = idx
            .iter()
            .map(|&i| format!("{:.2},{:.2}", x(report.freqs_hz[i]), y(class.mean[i])))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">Frequency (Hz)</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(svg, r##"<text x="{}" y="45" font-size="12" fill="#1f77b4">healthy</text>"##, w - 150.0);
    let _ = writeln!(svg, r##"<text x="{}" y="60" font-size="12" fill="#d62728">COVID-19</text>"##, w - 150.0);
    svg.push_str("</svg>\n");
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_rejected() {
        let c = PsdCurve { freqs_hz: vec![0.0, 1.0], density: vec![1.0, 1.0] };
        let curves = vec![c.clone(), c.clone(), c];
        assert!(matches!(
            class_psd_report(&curves, &[true, true, true], &[(0.0, 1.0)]),
            Err(Error::SingleClass(_))
        ));
    }
}
