use std::path::Path;
use std::process::{Command, Output};

use cough_ssl::pipeline::{PipelineConfig, Stage};

fn coughssl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coughssl"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run coughssl")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

// Small corpus: annotators see few recordings, so the per-class minimum is lowered.
fn small_corpus(dir: &Path) -> String {
    let o = coughssl(&["synth", "--out", dir.to_str().unwrap(), "--recordings", "60", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.join("config.toml");
    let mut cfg = PipelineConfig::load(&path).unwrap();
    cfg.paths = cough_ssl::pipeline::Paths {
        audio_dir: "audio".into(),
        metadata: "metadata.csv".into(),
        output_dir: "out".into(),
    };
    cfg.ssl.min_per_class = 3;
    cfg.training.budget = 4;
    cfg.gender.budget = 4;
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn full_run_then_stale_detection() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_corpus(dir.path());
    let out = dir.path().join("out");

    let early = coughssl(&["evaluate", "-c", &config]);
    assert_eq!(early.status.code(), Some(3));
    assert!(stderr(&early).contains("rerun `features`"), "{}", stderr(&early));

    for stage in Stage::ALL {
        let o = coughssl(&[stage.name(), "-c", &config, "--jobs", "1"]);
        assert!(o.status.success(), "{}: {}", stage.name(), stderr(&o));
    }
    for f in [
        "manifest.json",
        "segments.csv",
        "features.csv",
        "expert_models.json",
        "labels.csv",
        "coverage.csv",
        "coverage.txt",
        "final_model.json",
        "raw_model.json",
        "metrics.csv",
        "roc_ssl.csv",
        "band_tests.csv",
        "psd_user.csv",
        "psd_majority.svg",
        "roc.svg",
        "shap.csv",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();

    // Report is cached-artifact only and may be repeated.
    let again = coughssl(&["report", "-c", &config]);
    assert!(again.status.success(), "{}", stderr(&again));

    let features = out.join("features.csv");
    let mut text = std::fs::read_to_string(&features).unwrap();
    text.push('\n');
    std::fs::write(&features, text).unwrap();
    let stale = coughssl(&["ssl-relabel", "-c", &config]);
    assert_eq!(stale.status.code(), Some(3));
    assert!(stderr(&stale).contains("rerun `features`"), "{}", stderr(&stale));

    let changed = coughssl(&["train-final", "-c", &config, "--seed", "99"]);
    assert_eq!(changed.status.code(), Some(3));
    assert!(stderr(&changed).contains("configuration changed"), "{}", stderr(&changed));

    let rerun = coughssl(&["run", "-c", &config]);
    assert!(rerun.status.success(), "{}", stderr(&rerun));
    assert_eq!(std::fs::read_to_string(out.join("metrics.csv")).unwrap(), metrics);
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = coughssl(&["features", "-c", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let bad = dir.path().join("bad.toml");
    std::fs::create_dir(dir.path().join("audio")).unwrap();
    std::fs::write(dir.path().join("meta.csv"), "uuid,status\n").unwrap();
    std::fs::write(
        &bad,
        "[paths]\naudio_dir = \"audio\"\nmetadata = \"meta.csv\"\noutput_dir = \"out\"\n[ssl]\ntest_frac = 1.5\n",
    )
    .unwrap();
    let o = coughssl(&["preprocess", "-c", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("test_frac"), "{}", stderr(&o));

    let o = coughssl(&["no-such-stage"]);
    assert_eq!(o.status.code(), Some(2));
}
