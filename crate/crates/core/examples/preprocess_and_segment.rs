//! Normalize, low-pass and resample a few synthetic recordings, then cut
//! them into cough segments and estimate each recording's SNR.

use cough_ssl::dsp::{preprocess, PreprocessConfig};
use cough_ssl::segmentation::{estimate_snr, segment_coughs, SegmentationParams};
use cough_ssl::synth::{generate, SynthConfig};

fn main() -> cough_ssl::Result<()> {
    let synth = generate(&SynthConfig { n_recordings: 6, ..SynthConfig::default() })?;
    let dsp = PreprocessConfig::default();
    let params = SegmentationParams::default();

    for (uuid, raw) in &synth.audio {
        let clean = preprocess(raw, &dsp)?;
        let segments = segment_coughs(&clean, &params, uuid);
        let snr = estimate_snr(&clean, &segments)?;
        println!(
            "{uuid}: {:.2} s at {} Hz -> {} Hz, {} coughs, SNR {snr:.1} dB",
            raw.duration_s(),
            raw.sample_rate(),
            clean.sample_rate(),
            segments.len()
        );
        for s in &segments {
            let rate = clean.sample_rate() as f64;
            println!("    {:.3} s .. {:.3} s", s.start as f64 / rate, s.end as f64 / rate);
        }
    }
    Ok(())
}
