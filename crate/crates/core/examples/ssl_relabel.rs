//! End to end: write a synthetic crowdsourced corpus, run every pipeline
//! stage, and show coverage per label scheme and the final test metrics.
//!
//! cargo run --release --example ssl_relabel -- [recordings] [output dir]

use cough_ssl::pipeline::{run_all, PipelineConfig, COVERAGE_TXT, METRICS_CSV};
use cough_ssl::synth::{generate, SynthConfig};

fn main() -> cough_ssl::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(300);
    let dir = args.next().map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cough_ssl_example"));

    let synth = generate(&SynthConfig { n_recordings: n, ..SynthConfig::default() })?;
    synth.write(&dir)?;
    let mut cfg = PipelineConfig::new(dir.join("audio"), dir.join("metadata.csv"), dir.join("out"));
    cfg.training.budget = 20;
    run_all(&cfg)?;

    let out = &cfg.paths.output_dir;
    let read = |f: &str| std::fs::read_to_string(out.join(f)).unwrap_or_default();
    println!("{}", read(COVERAGE_TXT));
    println!("{}", read(METRICS_CSV));
    println!("all artifacts are in {}", out.display());
    Ok(())
}
