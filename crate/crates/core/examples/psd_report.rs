//! Class-average normalized PSD of cough segments with a band t-test,
//! using the true labels and the noisy uploader labels of a synthetic corpus.

use std::collections::BTreeMap;

use cough_ssl::dsp::{preprocess, PreprocessConfig};
use cough_ssl::features::{class_psd_report, normalized_psd, write_psd_csv, write_psd_svg, PsdCurve};
use cough_ssl::segmentation::{segment_coughs, SegmentationParams};
use cough_ssl::synth::{generate, SynthConfig};

fn main() -> cough_ssl::Result<()> {
    let synth = generate(&SynthConfig { n_recordings: 120, ..SynthConfig::default() })?;
    let bands = [(1000.0, 1500.0), (2000.0, 2500.0)];
    let out = std::env::temp_dir();

    let mut curves: Vec<(String, PsdCurve)> = Vec::new();
    for (uuid, raw) in &synth.audio {
        let clean = preprocess(raw, &PreprocessConfig::default())?;
        for s in segment_coughs(&clean, &SegmentationParams::default(), uuid) {
            curves.push((uuid.clone(), normalized_psd(s.slice(clean.samples()), clean.sample_rate() as f64, 1024)?));
        }
    }

    let user: BTreeMap<&str, bool> = synth
        .corpus
        .records
        .iter()
        .filter_map(|r| r.user_status.binary().map(|l| (r.uuid.as_str(), l.is_positive())))
        .collect();
    let truth: BTreeMap<&str, bool> = synth.truth.iter().map(|(k, v)| (k.as_str(), *v)).collect();

    for (name, labels) in [("truth", &truth), ("user", &user)] {
        let (c, y): (Vec<PsdCurve>, Vec<bool>) = curves
            .iter()
            .filter_map(|(u, c)| labels.get(u.as_str()).map(|&l| (c.clone(), l)))
            .unzip();
        let report = class_psd_report(&c, &y, &bands)?;
        println!("{name} labels: {} healthy / {} positive segments", report.healthy.n_segments, report.covid.n_segments);
        for b in &report.bands {
            println!(
                "    {:.0}-{:.0} Hz: healthy {:.4}, positive {:.4}, t = {:.2}, log10 p = {:.1}",
                b.band.0, b.band.1, b.mean_healthy, b.mean_covid, b.t, b.log10_p()
            );
        }
        write_psd_csv(&report, out.join(format!("psd_{name}.csv")))?;
        write_psd_svg(&report, &format!("Average normalized PSD, {name} labels"), 6000.0, out.join(format!("psd_{name}.svg")))?;
    }
    println!("curves written to {}", out.display());
    Ok(())
}
