//! Per-cough feature vectors (MFCC statistics, EEPD, spectral, time-domain
//! and PSD band powers) for a small synthetic corpus.

use cough_ssl::dsp::{preprocess, PreprocessConfig};
use cough_ssl::features::{extract_acoustic, FeatureConfig, FeatureRow, FeatureTable};
use cough_ssl::segmentation::{segment_coughs, SegmentationParams};
use cough_ssl::synth::{generate, SynthConfig};

fn main() -> cough_ssl::Result<()> {
    let synth = generate(&SynthConfig { n_recordings: 8, ..SynthConfig::default() })?;
    let cfg = FeatureConfig::default();
    let mut table = FeatureTable::new(cfg.acoustic_names());

    for (uuid, raw) in &synth.audio {
        let clean = preprocess(raw, &PreprocessConfig::default())?;
        let rate = clean.sample_rate() as f64;
        for (i, seg) in segment_coughs(&clean, &SegmentationParams::default(), uuid).iter().enumerate() {
            let values = extract_acoustic(seg.slice(clean.samples()), rate, &cfg)?;
            table.rows.push(FeatureRow { uuid: uuid.clone(), segment_index: i, values });
        }
    }
    println!("{} features x {} coughs", table.names.len(), table.rows.len());

    // The planted band shows up in the 1000-1500 Hz PSD power.
    let band = table.column("psd_1000_1500").expect("default PSD bands include 1000-1500 Hz");
    for positive in [false, true] {
        let vals: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| synth.truth[&r.uuid] == positive)
            .map(|r| r.values[band])
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        println!("{:>8}: mean psd_1000_1500 = {mean:.4} over {} coughs", if positive { "positive" } else { "negative" }, vals.len());
    }
    Ok(())
}
