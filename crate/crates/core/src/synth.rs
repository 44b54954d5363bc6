//! Synthetic cough corpus with known ground truth.
//!
//! Each recording is a few band-shaped noise bursts over a quiet noise
//! floor. Positive recordings get extra gain in one frequency band. Expert
//! and user labels are noisy, partial copies of the truth.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dataset::{write_metadata, write_wav_i16, AudioSignal, Corpus, ExpertLabel, Gender, RecordingMeta, UserStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_recordings: usize,
    pub sample_rate: u32,
    pub min_coughs: usize,
    pub max_coughs: usize,
    pub positive_frac: f64,
    /// Gain added to the positive class inside `band_hz`.
    pub band_boost_db: f64,
    pub band_hz: (f64, f64),
    pub n_annotators: usize,
    /// Probability that an annotator labels a given recording.
    pub annotator_coverage: f64,
    pub annotator_noise: f64,
    /// Share of annotator labels that are "other" instead of a diagnosis.
    pub other_frac: f64,
    pub user_noise: f64,
    /// Probability that the user label is missing.
    pub user_erase: f64,
    pub unknown_gender_frac: f64,
    /// Share of recordings whose cough-detector score is below 0.8.
    pub low_cough_score_frac: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_recordings: 600,
            sample_rate: 24_000,
            min_coughs: 3,
            max_coughs: 5,
            positive_frac: 0.35,
            band_boost_db: 6.0,
            band_hz: (1000.0, 1500.0),
            n_annotators: 3,
            annotator_coverage: 0.4,
            annotator_noise: 0.15,
            other_frac: 0.03,
            user_noise: 0.15,
            user_erase: 0.4,
            unknown_gender_frac: 0.2,
            low_cough_score_frac: 0.03,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            self.positive_frac,
            self.annotator_coverage,
            self.annotator_noise,
            self.other_frac,
            self.user_noise,
            self.user_erase,
            self.unknown_gender_frac,
            self.low_cough_score_frac,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("synth probabilities must lie in [0, 1]".into()));
        }
        if self.n_recordings == 0 || self.n_annotators == 0 || self.min_coughs == 0 || self.min_coughs > self.max_coughs {
            return Err(Error::Config("synth needs recordings, annotators and 1 <= min_coughs <= max_coughs".into()));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(0.0 <= self.band_hz.0 && self.band_hz.0 < self.band_hz.1 && self.band_hz.1 <= nyquist) {
            return Err(Error::Config(format!("band {:?} is not inside (0, {nyquist})", self.band_hz)));
        }
        Ok(())
    }

    pub fn annotator_ids(&self) -> Vec<String> {
        (1..=self.n_annotators).map(|i| i.to_string()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub audio: Vec<(String, AudioSignal)>,
    /// `uuid -> positive?`
    pub truth: BTreeMap<String, bool>,
}

impl SynthCorpus {
    /// Writes `metadata.csv`, `truth.csv` and `audio/<uuid>.wav` under `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let audio_dir = dir.join("audio");
        std::fs::create_dir_all(&audio_dir).map_err(|e| Error::io(&audio_dir, e))?;
        write_metadata(&self.corpus, dir.join("metadata.csv"))?;
        let truth_path = dir.join("truth.csv");
        let mut w = csv::Writer::from_path(&truth_path).map_err(|e| Error::csv(&truth_path, e))?;
        w.write_record(["uuid", "positive"]).map_err(|e| Error::csv(&truth_path, e))?;
        for (u, p) in &self.truth {
            w.write_record([u.as_str(), if *p { "1" } else { "0" }])
                .map_err(|e| Error::csv(&truth_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&truth_path, e))?;
        for (uuid, signal) in &self.audio {
            write_wav_i16(signal, audio_dir.join(format!("{uuid}.wav")))?;
        }
        Ok(())
    }
}

/// Per-recording voice traits shared by all of its coughs.
struct Voice {
    tilt: f64,
    low_formant: f64,
    high_formant: f64,
    boost: f64,
}

impl Voice {
    fn gain(&self, f: f64, band: (f64, f64)) -> f64 {
        let bump = |centre: f64, width: f64| (-0.5 * ((f - centre) / width).powi(2)).exp();
        let base = (f.max(50.0) / 50.0).powf(-self.tilt) * (1.0 + 3.0 * bump(self.low_formant, 150.0) + 2.0 * bump(self.high_formant, 400.0));
        if f >= band.0 && f <= band.1 {
            base * self.boost
        } else {
            base
        }
    }
}

fn shaped_noise(n: usize, rate: f64, voice: &Voice, band: (f64, f64), rng: &mut ChaCha8Rng, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(rng.sample(StandardNormal), 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        *c *= voice.gain(bin as f64 * rate / n as f64, band);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt().max(1e-300);
    out.into_iter().map(|v| v / rms).collect()
}

fn noisy<T: Copy>(truth: T, flipped: T, p: f64, rng: &mut ChaCha8Rng) -> T {
    if rng.random_bool(p) {
        flipped
    } else {
        truth
    }
}

/// Generates the corpus in memory. Same config, same corpus.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut planner = FftPlanner::new();
    let rate = cfg.sample_rate as f64;
    let annotators = cfg.annotator_ids();
    let boost = 10f64.powf(cfg.band_boost_db / 20.0);
    let floor = Normal::new(0.0, 0.003).unwrap();

    let mut corpus = Corpus {
        annotators: annotators.clone(),
        records: Vec::with_capacity(cfg.n_recordings),
    };
    let mut audio = Vec::with_capacity(cfg.n_recordings);
    let mut truth = BTreeMap::new();
    for i in 0..cfg.n_recordings {
        let uuid = format!("syn{i:05}");
        let positive = rng.random_bool(cfg.positive_frac);
        let male = rng.random_bool(0.5);
        let scale = if male { 0.85 } else { 1.0 };
        let voice = Voice {
            tilt: rng.random_range(0.45..0.55),
            low_formant: scale * rng.random_range(400.0..500.0),
            high_formant: scale * rng.random_range(2400.0..2800.0),
            boost: if positive { boost } else { 1.0 },
        };

        let n_coughs = rng.random_range(cfg.min_coughs..=cfg.max_coughs);
        let mut samples: Vec<f64> = (0..(0.4 * rate) as usize).map(|_| floor.sample(&mut rng)).collect();
        for _ in 0..n_coughs {
            let len = (rng.random_range(0.25..0.4) * rate) as usize;
            let tone = shaped_noise(len, rate, &voice, cfg.band_hz, &mut rng, &mut planner);
            let peak = rng.random_range(0.3..0.9);
            let attack = 0.02 * rate;
            let decay = rng.random_range(0.1..0.15) * rate;
            for (t, v) in tone.iter().enumerate() {
                let t = t as f64;
                let env = if t < attack { t / attack } else { (-(t - attack) / decay).exp() };
                samples.push(0.3 * peak * env * v + floor.sample(&mut rng));
            }
            let gap = (rng.random_range(0.6..1.0) * rate) as usize;
            samples.extend((0..gap).map(|_| floor.sample(&mut rng)));
        }
        let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.99 {
            samples.iter_mut().for_each(|v| *v *= 0.99 / peak);
        }

        let truth_user = if positive { UserStatus::Covid } else { UserStatus::Healthy };
        let flipped_user = if positive { UserStatus::Healthy } else { UserStatus::Covid };
        let mut user_status = noisy(truth_user, flipped_user, cfg.user_noise, &mut rng);
        if rng.random_bool(cfg.user_erase) {
            user_status = if rng.random_bool(0.25) { UserStatus::Symptomatic } else { UserStatus::None };
        }
        let mut expert_labels = BTreeMap::new();
        for a in &annotators {
            let label = if !rng.random_bool(cfg.annotator_coverage) {
                ExpertLabel::None
            } else if rng.random_bool(cfg.other_frac) {
                ExpertLabel::Other
            } else {
                let (t, f) = if positive {
                    (ExpertLabel::Covid, ExpertLabel::Healthy)
                } else {
                    (ExpertLabel::Healthy, ExpertLabel::Covid)
                };
                noisy(t, f, cfg.annotator_noise, &mut rng)
            };
            expert_labels.insert(a.clone(), label);
        }
        let gender = if rng.random_bool(cfg.unknown_gender_frac) {
            Gender::Unknown
        } else if male {
            Gender::Male
        } else {
            Gender::Female
        };
        let cough_score: f64 = if rng.random_bool(cfg.low_cough_score_frac) {
            rng.random_range(0.3..0.8)
        } else {
            rng.random_range(0.81..1.0)
        };
        // Rounded so the value survives a CSV round trip unchanged.
        let cough_score = (cough_score * 1e4).round() / 1e4;

        corpus.records.push(RecordingMeta {
            uuid: uuid.clone(),
            user_status,
            expert_labels,
            gender,
            cough_score,
            snr_db: None,
        });
        audio.push((uuid.clone(), AudioSignal::new(samples, cfg.sample_rate)?));
        truth.insert(uuid, positive);
    }
    Ok(SynthCorpus { corpus, audio, truth })
}

/// Feature-level stand-in for a corpus: each recording has a latent
/// class-dependent mean and each cough adds independent noise around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoughFeatureSim {
    pub n_recordings: usize,
    pub coughs_per_recording: usize,
    pub n_features: usize,
    /// Class mean separation of the informative features.
    pub separation: f64,
    pub n_informative: usize,
    pub recording_sd: f64,
    pub cough_sd: f64,
    pub positive_frac: f64,
}

impl Default for CoughFeatureSim {
    fn default() -> Self {
        CoughFeatureSim {
            n_recordings: 200,
            coughs_per_recording: 4,
            n_features: 10,
            separation: 0.6,
            n_informative: 3,
            recording_sd: 0.5,
            cough_sd: 1.5,
            positive_frac: 0.35,
        }
    }
}

/// Cough rows, labels and recording ids drawn from `sim`.
pub fn simulate_cough_features(sim: &CoughFeatureSim, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut positives: Vec<bool> = (0..sim.n_recordings)
        .map(|i| (i as f64) < sim.positive_frac * sim.n_recordings as f64)
        .collect();
    positives.shuffle(&mut rng);
    for (r, &positive) in positives.iter().enumerate() {
        let centre: Vec<f64> = (0..sim.n_features)
            .map(|j| {
                let shift = if j < sim.n_informative && positive { sim.separation } else { 0.0 };
                shift + sim.recording_sd * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        for _ in 0..sim.coughs_per_recording {
            rows.push(centre.iter().map(|c| c + sim.cough_sd * rng.sample::<f64, _>(StandardNormal)).collect());
            labels.push(positive);
            groups.push(format!("rec{r:04}"));
        }
    }
    (rows, labels, groups)
}
