use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::manifest::{Manifest, StageLog};
use super::{PipelineConfig, Stage};
use crate::dataset::{
    filter_corpus, load_audio, load_metadata, read_labels, write_labels, write_metadata, write_wav_f32, AudioSignal,
    Corpus, LabelRecord,
};
use crate::dsp::preprocess;
use crate::error::{Error, Result};
use crate::features::{
    class_psd_report, extract_acoustic, normalized_psd, read_features, write_features, write_psd_csv, write_psd_svg,
    FeatureRow, FeatureTable, PsdReport,
};
use crate::gender::{append_gender, impute_gender, train_gender_model};
use crate::ml::{shap_importance, RocPoint, TrainedModel};
use crate::segmentation::{estimate_snr, segment_coughs, CoughSegment};
use crate::ssl::{
    build_ssl_dataset, coverage_report, evaluate, scheme_labels, train_expert_models, train_final_model, write_roc_csv,
    Evaluation, ExpertModelSet, LabelScheme,
};
use crate::tpe::write_history_csv;
use crate::train::{search_space, TrainConfig, TrainReport};

pub const PREPROCESSED_DIR: &str = "preprocessed";
pub const SEGMENTS_CSV: &str = "segments.csv";
pub const METADATA_SNR_CSV: &str = "metadata_snr.csv";
pub const METADATA_FILTERED_CSV: &str = "metadata_filtered.csv";
pub const FEATURES_CSV: &str = "features.csv";
pub const GENDER_MODEL_JSON: &str = "gender_model.json";
pub const SPLIT_CSV: &str = "split.csv";
pub const EXPERT_MODELS_JSON: &str = "expert_models.json";
pub const EXPERTS_CSV: &str = "experts.csv";
pub const LABELS_CSV: &str = "labels.csv";
pub const COVERAGE_CSV: &str = "coverage.csv";
pub const COVERAGE_TXT: &str = "coverage.txt";
pub const FINAL_MODEL_JSON: &str = "final_model.json";
pub const RAW_MODEL_JSON: &str = "raw_model.json";
pub const FINAL_TPE_CSV: &str = "tpe_history_final.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const ROC_SSL_CSV: &str = "roc_ssl.csv";
pub const ROC_RAW_CSV: &str = "roc_raw.csv";
pub const BAND_TESTS_CSV: &str = "band_tests.csv";
pub const SHAP_CSV: &str = "shap.csv";

fn preprocessed_file(uuid: &str) -> String {
    format!("{PREPROCESSED_DIR}/{uuid}.wav")
}

/// Shared state of one stage invocation.
struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    manifest: Manifest,
    log: StageLog,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a PipelineConfig, stage: Stage) -> Result<Self> {
        let out = cfg.paths.output_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Ctx {
            cfg,
            manifest: Manifest::load(&out)?,
            log: StageLog::new(&out, cfg.stage_hash(stage), cfg.training.seed),
            out,
        })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    /// Checks that `producer` wrote `file` under the current config and
    /// records it as an input.
    fn need(&mut self, producer: Stage, file: &str) -> Result<PathBuf> {
        self.manifest
            .check_artifact(&self.out, producer, &self.cfg.stage_hash(producer), file)?;
        let p = self.path(file);
        self.log.input(&p)?;
        Ok(p)
    }

    fn produced(&mut self, file: &str) -> Result<PathBuf> {
        let p = self.path(file);
        self.log.output(&p)?;
        Ok(p)
    }

    fn commit(self, stage: Stage) -> Result<()> {
        self.log.commit(stage)
    }
}

fn load_corpus(cfg: &PipelineConfig, path: &Path) -> Result<Corpus> {
    let corpus = load_metadata(path)?;
    if cfg.ssl.annotators.is_empty() {
        Ok(corpus)
    } else {
        corpus.restrict_annotators(&cfg.ssl.annotators)
    }
}

pub fn run_preprocess(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::Preprocess)?;
    let dir = ctx.path(PREPROCESSED_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    ctx.log.input(&cfg.paths.metadata)?;
    let corpus = load_corpus(cfg, &cfg.paths.metadata)?;
    let done: Vec<Option<String>> = corpus
        .records
        .par_iter()
        .map(|r| {
            let src = cfg.paths.audio_dir.join(format!("{}.wav", r.uuid));
            let signal = load_audio(&src)?;
            match preprocess(&signal, &cfg.preprocess) {
                Ok(s) => {
                    write_wav_f32(&s, ctx.path(&preprocessed_file(&r.uuid)))?;
                    Ok(Some(r.uuid.clone()))
                }
                Err(Error::ZeroSignal) => {
                    log::warn!("{}: silent recording skipped", r.uuid);
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    for r in &corpus.records {
        ctx.log.input(&cfg.paths.audio_dir.join(format!("{}.wav", r.uuid)))?;
    }
    for uuid in done.iter().flatten() {
        ctx.produced(&preprocessed_file(uuid))?;
    }
    log::info!("preprocessed {} of {} recordings", done.iter().flatten().count(), corpus.len());
    ctx.commit(Stage::Preprocess)
}

pub fn write_segments(segments: &[(CoughSegment, f64)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["uuid", "index", "start_sample", "end_sample", "snr_db"])
        .map_err(|e| Error::csv(path, e))?;
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (s, snr) in segments {
        let i = index.entry(s.recording_uuid.as_str()).or_insert(0);
        w.write_record([
            s.recording_uuid.clone(),
            i.to_string(),
            s.start.to_string(),
            s.end.to_string(),
            snr.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
        *i += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_segments(path: &Path) -> Result<Vec<CoughSegment>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let bad = |column: &str| Error::MalformedRow {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            column: column.into(),
            reason: "not a sample index".into(),
        };
        out.push(CoughSegment {
            recording_uuid: row.get(0).unwrap_or("").to_string(),
            start: row.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("start_sample"))?,
            end: row.get(3).and_then(|v| v.parse().ok()).ok_or_else(|| bad("end_sample"))?,
        });
    }
    Ok(out)
}

pub fn run_segment(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::Segment)?;
    ctx.log.input(&cfg.paths.metadata)?;
    let mut corpus = load_corpus(cfg, &cfg.paths.metadata)?;
    let produced: BTreeSet<String> = ctx
        .manifest
        .stages
        .get(Stage::Preprocess.name())
        .map(|r| r.outputs.keys().cloned().collect())
        .unwrap_or_default();
    let mut available = Vec::new();
    for r in &corpus.records {
        let file = preprocessed_file(&r.uuid);
        if produced.contains(&file) {
            ctx.need(Stage::Preprocess, &file)?;
            available.push(true);
        } else {
            available.push(false);
        }
    }
    if !available.iter().any(|&a| a) {
        return Err(Error::StaleArtifact {
            stage: Stage::Preprocess.name().into(),
            detail: "no preprocessed audio found".into(),
        });
    }
    let results: Vec<(Vec<CoughSegment>, f64)> = corpus
        .records
        .par_iter()
        .zip(&available)
        .map(|(r, &ok)| {
            if !ok {
                return Ok((Vec::new(), f64::NEG_INFINITY));
            }
            let signal = load_audio(ctx.path(&preprocessed_file(&r.uuid)))?;
            let segs = segment_coughs(&signal, &cfg.segmentation, &r.uuid);
            let snr = match estimate_snr(&signal, &segs) {
                Ok(v) => v,
                Err(e) => {
                    log::debug!("{}: {e}", r.uuid);
                    f64::NEG_INFINITY
                }
            };
            Ok((segs, snr))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (rec, (segs, snr)) in corpus.records.iter_mut().zip(results) {
        rec.snr_db = Some(snr);
        rows.extend(segs.into_iter().map(|s| (s, snr)));
    }
    write_segments(&rows, &ctx.path(SEGMENTS_CSV))?;
    write_metadata(&corpus, ctx.path(METADATA_SNR_CSV))?;
    ctx.produced(SEGMENTS_CSV)?;
    ctx.produced(METADATA_SNR_CSV)?;
    log::info!("{} segments in {} recordings", rows.len(), corpus.len());
    ctx.commit(Stage::Segment)
}

fn segments_by_recording(segments: Vec<CoughSegment>) -> BTreeMap<String, Vec<CoughSegment>> {
    let mut m: BTreeMap<String, Vec<CoughSegment>> = BTreeMap::new();
    for s in segments {
        m.entry(s.recording_uuid.clone()).or_default().push(s);
    }
    m
}

/// Feature rows of every segment of the given recordings, in corpus order.
fn extract_rows(ctx: &Ctx, uuids: &[String], segments: &BTreeMap<String, Vec<CoughSegment>>) -> Result<Vec<FeatureRow>> {
    let fcfg = &ctx.cfg.features;
    let per_rec: Vec<Vec<FeatureRow>> = uuids
        .par_iter()
        .map(|uuid| {
            let Some(segs) = segments.get(uuid) else { return Ok(Vec::new()) };
            let signal = load_audio(ctx.path(&preprocessed_file(uuid)))?;
            let rate = signal.sample_rate() as f64;
            let mut rows = Vec::new();
            for (i, s) in segs.iter().enumerate() {
                match extract_acoustic(s.slice(signal.samples()), rate, fcfg) {
                    Ok(values) => rows.push(FeatureRow {
                        uuid: uuid.clone(),
                        segment_index: i,
                        values,
                    }),
                    Err(e) => log::warn!("{uuid} segment {i} skipped: {e}"),
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_rec.into_iter().flatten().collect())
}

fn sub_config(cfg: &TrainConfig, budget: usize) -> TrainConfig {
    TrainConfig {
        budget,
        ..cfg.clone()
    }
}

pub fn run_features(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::Features)?;
    let meta = ctx.need(Stage::Segment, METADATA_SNR_CSV)?;
    let seg_path = ctx.need(Stage::Segment, SEGMENTS_CSV)?;
    let corpus = filter_corpus(&load_corpus(cfg, &meta)?, cfg.filter.min_cough_score, cfg.filter.min_snr_db)?;
    let segments = segments_by_recording(read_segments(&seg_path)?);
    let uuids: Vec<String> = corpus.records.iter().map(|r| r.uuid.clone()).collect();
    for u in &uuids {
        ctx.need(Stage::Preprocess, &preprocessed_file(u))?;
    }
    let mut table = FeatureTable::new(cfg.features.acoustic_names());
    table.rows = extract_rows(&ctx, &uuids, &segments)?;
    if table.rows.is_empty() {
        return Err(Error::EmptyInput("no recording passed the cough-score and SNR filters".into()));
    }
    log::info!("{} recordings kept, {} cough feature rows", uuids.len(), table.rows.len());

    let mut corpus = corpus;
    if cfg.features.include_gender {
        let with_rows: BTreeSet<&str> = table.rows.iter().map(|r| r.uuid.as_str()).collect();
        let needs_model = corpus
            .records
            .iter()
            .any(|r| r.gender.as_feature().is_none() && with_rows.contains(r.uuid.as_str()));
        if needs_model {
            let report = train_gender_model(&corpus, &table, &sub_config(&cfg.training, cfg.gender.budget))?;
            log::info!("gender model CV AUC {:.3}", report.model.cv_auc);
            corpus = impute_gender(&report.model, &corpus, &table)?;
            report.model.save_json(ctx.path(GENDER_MODEL_JSON))?;
            ctx.produced(GENDER_MODEL_JSON)?;
        }
        append_gender(&mut table, &corpus)?;
    }
    write_features(&table, ctx.path(FEATURES_CSV))?;
    write_metadata(&corpus, ctx.path(METADATA_FILTERED_CSV))?;
    ctx.produced(FEATURES_CSV)?;
    ctx.produced(METADATA_FILTERED_CSV)?;
    ctx.commit(Stage::Features)
}

/// Test-partition recordings: a seeded shuffle of the sorted ids.
pub fn split_test(uuids: &BTreeSet<String>, test_frac: f64, seed: u64) -> BTreeSet<String> {
    let mut ids: Vec<&String> = uuids.iter().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((test_frac * ids.len() as f64).ceil() as usize).min(ids.len().saturating_sub(1));
    ids.into_iter().take(n_test).cloned().collect()
}

fn write_split(all: &BTreeSet<String>, test: &BTreeSet<String>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["uuid", "partition"]).map_err(|e| Error::csv(path, e))?;
    for u in all {
        let part = if test.contains(u) { "test" } else { "train" };
        w.write_record([u.as_str(), part]).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(train, test)` recording ids from a split table.
pub fn read_split(path: &Path) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let (mut train, mut test) = (BTreeSet::new(), BTreeSet::new());
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let uuid = row.get(0).unwrap_or("").to_string();
        match row.get(1) {
            Some("train") => train.insert(uuid),
            Some("test") => test.insert(uuid),
            other => {
                return Err(Error::MalformedRow {
                    path: path.to_path_buf(),
                    line: i as u64 + 2,
                    column: "partition".into(),
                    reason: format!("expected train or test, got {other:?}"),
                })
            }
        };
    }
    Ok((train, test))
}

fn write_experts_csv(set: &ExpertModelSet, reports: &[(String, TrainReport)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["annotator", "status", "kind", "cv_auc", "cv_auc_std", "n_features", "threshold", "reason"])
        .map_err(|e| Error::csv(path, e))?;
    for (a, r) in reports {
        let m = &r.model;
        w.write_record([
            a.clone(),
            "trained".into(),
            m.model.spec.kind().name().into(),
            m.cv_auc.to_string(),
            m.cv_auc_std.to_string(),
            m.selected_names().len().to_string(),
            m.threshold.to_string(),
            String::new(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    for x in &set.excluded {
        w.write_record([x.annotator.as_str(), "excluded", "", "", "", "", "", x.reason.as_str()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn run_train_experts(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::TrainExperts)?;
    let features = read_features(ctx.need(Stage::Features, FEATURES_CSV)?)?;
    let corpus = load_corpus(cfg, &ctx.need(Stage::Features, METADATA_FILTERED_CSV)?)?;
    let all: BTreeSet<String> = features.rows.iter().map(|r| r.uuid.clone()).collect();
    let test = split_test(&all, cfg.ssl.test_frac, cfg.ssl.split_seed);
    write_split(&all, &test, &ctx.path(SPLIT_CSV))?;

    let train_corpus = Corpus {
        annotators: corpus.annotators.clone(),
        records: corpus.records.iter().filter(|r| !test.contains(&r.uuid)).cloned().collect(),
    };
    let train_features = features.filter_recordings(|u| !test.contains(u));
    let (set, reports) = train_expert_models(&train_corpus, &train_features, cfg.ssl.min_per_class, &cfg.training)?;
    for (a, r) in &reports {
        log::info!("expert {a}: {} CV AUC {:.3}", r.model.model.spec.kind().name(), r.model.cv_auc);
    }
    set.save_json(ctx.path(EXPERT_MODELS_JSON))?;
    write_experts_csv(&set, &reports, &ctx.path(EXPERTS_CSV))?;
    ctx.produced(SPLIT_CSV)?;
    ctx.produced(EXPERT_MODELS_JSON)?;
    ctx.produced(EXPERTS_CSV)?;
    ctx.commit(Stage::TrainExperts)
}

pub fn run_ssl_relabel(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::SslRelabel)?;
    let features = read_features(ctx.need(Stage::Features, FEATURES_CSV)?)?;
    let corpus = load_corpus(cfg, &ctx.need(Stage::Features, METADATA_FILTERED_CSV)?)?;
    let models = ExpertModelSet::load_json(ctx.need(Stage::TrainExperts, EXPERT_MODELS_JSON)?)?;
    let (_, test) = read_split(&ctx.need(Stage::TrainExperts, SPLIT_CSV)?)?;

    let ssl = build_ssl_dataset(&models, &corpus, &features, cfg.ssl.scheme)?;
    write_labels(&ssl.records, ctx.path(LABELS_CSV))?;
    let report = coverage_report(&ssl.records, &ssl.annotators, &features, &test)?;
    report.write_csv(ctx.path(COVERAGE_CSV))?;
    let summary = report.summary();
    std::fs::write(ctx.path(COVERAGE_TXT), &summary).map_err(|e| Error::io(ctx.path(COVERAGE_TXT), e))?;
    log::info!("label coverage:\n{summary}");
    ctx.produced(LABELS_CSV)?;
    ctx.produced(COVERAGE_CSV)?;
    ctx.produced(COVERAGE_TXT)?;
    ctx.commit(Stage::SslRelabel)
}

/// Labels of `records` under `scheme`, restricted to `keep`.
fn labels_in(
    records: &[LabelRecord],
    annotators: &[String],
    scheme: LabelScheme,
    keep: &BTreeSet<String>,
) -> Result<BTreeMap<String, bool>> {
    let mut m = scheme_labels(records, annotators, scheme)?;
    m.retain(|u, _| keep.contains(u));
    Ok(m)
}

fn annotators_of(records: &[LabelRecord]) -> Vec<String> {
    records
        .first()
        .map(|r| r.expert_or_pseudo.keys().cloned().collect())
        .unwrap_or_default()
}

pub fn run_train_final(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::TrainFinal)?;
    let features = read_features(ctx.need(Stage::Features, FEATURES_CSV)?)?;
    let records = read_labels(ctx.need(Stage::SslRelabel, LABELS_CSV)?)?;
    let (train, _) = read_split(&ctx.need(Stage::TrainExperts, SPLIT_CSV)?)?;
    let annotators = annotators_of(&records);

    let ssl_labels = labels_in(&records, &annotators, LabelScheme::Agreement(cfg.ssl.scheme), &train)?;
    let ssl = train_final_model(&features, &ssl_labels, &cfg.training)?;
    log::info!("SSL model: {} CV AUC {:.3}", ssl.model.model.spec.kind().name(), ssl.model.cv_auc);
    ssl.model.save_json(ctx.path(FINAL_MODEL_JSON))?;
    let kind = ssl.model.model.spec.kind();
    if let Some(search) = ssl.refit_search.as_ref().or_else(|| ssl.searches.iter().find(|s| s.kind == kind)) {
        write_history_csv(&search_space(kind), &search.result, ctx.path(FINAL_TPE_CSV))?;
    }

    let user_labels = labels_in(&records, &annotators, LabelScheme::User, &train)?;
    let raw = train_final_model(&features, &user_labels, &cfg.training)?;
    log::info!("user-label model: {} CV AUC {:.3}", raw.model.model.spec.kind().name(), raw.model.cv_auc);
    raw.model.save_json(ctx.path(RAW_MODEL_JSON))?;

    ctx.produced(FINAL_MODEL_JSON)?;
    ctx.produced(FINAL_TPE_CSV)?;
    ctx.produced(RAW_MODEL_JSON)?;
    ctx.commit(Stage::TrainFinal)
}

fn metrics_row(name: &str, scheme: &str, m: &TrainedModel, e: &Evaluation) -> Vec<String> {
    vec![
        name.into(),
        scheme.into(),
        m.model.spec.kind().name().into(),
        m.selected_names().len().to_string(),
        m.aggregation.name().into(),
        m.cv_auc.to_string(),
        m.cv_auc_std.to_string(),
        e.threshold.to_string(),
        e.n_recordings.to_string(),
        e.n_positive_recordings.to_string(),
        e.n_coughs.to_string(),
        e.auc_cough.to_string(),
        e.auc_recording.to_string(),
        e.sensitivity.to_string(),
        e.specificity.to_string(),
    ]
}

pub const METRICS_HEADER: [&str; 15] = [
    "model",
    "label_scheme",
    "kind",
    "n_features",
    "aggregation",
    "cv_auc",
    "cv_auc_std",
    "threshold",
    "test_recordings",
    "test_positive_recordings",
    "test_coughs",
    "test_auc_cough",
    "test_auc_recording",
    "sensitivity",
    "specificity",
];

/// Tests each model on held-out recordings labeled by the scheme it was
/// trained on.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::Evaluate)?;
    let features = read_features(ctx.need(Stage::Features, FEATURES_CSV)?)?;
    let records = read_labels(ctx.need(Stage::SslRelabel, LABELS_CSV)?)?;
    let (_, test) = read_split(&ctx.need(Stage::TrainExperts, SPLIT_CSV)?)?;
    let ssl_model = TrainedModel::load_json(ctx.need(Stage::TrainFinal, FINAL_MODEL_JSON)?)?;
    let raw_model = TrainedModel::load_json(ctx.need(Stage::TrainFinal, RAW_MODEL_JSON)?)?;
    let annotators = annotators_of(&records);

    let ssl_scheme = LabelScheme::Agreement(cfg.ssl.scheme);
    let ssl_eval = evaluate(&ssl_model, &features, &labels_in(&records, &annotators, ssl_scheme, &test)?)?;
    let raw_eval = evaluate(&raw_model, &features, &labels_in(&records, &annotators, LabelScheme::User, &test)?)?;

    let path = ctx.path(METRICS_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record(METRICS_HEADER).map_err(|e| Error::csv(&path, e))?;
    w.write_record(metrics_row("ssl", ssl_scheme.name(), &ssl_model, &ssl_eval))
        .map_err(|e| Error::csv(&path, e))?;
    w.write_record(metrics_row("raw", LabelScheme::User.name(), &raw_model, &raw_eval))
        .map_err(|e| Error::csv(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_roc_csv(&ssl_eval.roc, ctx.path(ROC_SSL_CSV))?;
    write_roc_csv(&raw_eval.roc, ctx.path(ROC_RAW_CSV))?;
    log::info!(
        "test AUC (recording): SSL {:.3}, user labels {:.3}",
        ssl_eval.auc_recording,
        raw_eval.auc_recording
    );
    for f in [METRICS_CSV, ROC_SSL_CSV, ROC_RAW_CSV] {
        ctx.produced(f)?;
    }
    ctx.commit(Stage::Evaluate)
}

fn read_roc(path: &Path) -> Result<Vec<RocPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let num = |c: usize| -> Result<f64> {
            row.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| Error::MalformedRow {
                path: path.to_path_buf(),
                line: i as u64 + 2,
                column: ["fpr", "tpr", "threshold"][c].into(),
                reason: "not a number".into(),
            })
        };
        out.push(RocPoint {
            fpr: num(0)?,
            tpr: num(1)?,
            threshold: num(2)?,
        });
    }
    Ok(out)
}

fn write_roc_svg(curves: &[(&str, &str, &[RocPoint])], path: &Path) -> Result<()> {
    let (size, pad) = (400.0, 40.0);
    let map = |p: &RocPoint| (pad + p.fpr * size, pad + (1.0 - p.tpr) * size);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" font-family="sans-serif" font-size="12">"#,
        w = size + 2.0 * pad
    );
    let _ = writeln!(s, r#"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{pad}" stroke="gray" stroke-dasharray="4"/>"#,
        pad + size,
        pad + size
    );
    for (k, (label, colour, pts)) in curves.iter().enumerate() {
        let line: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, line.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{colour}">{label}</text>"#,
            pad + size * 0.55,
            pad + size * 0.8 + 16.0 * k as f64
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">false positive rate</text>"#, pad + size / 2.0 - 50.0, size + 2.0 * pad - 8.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})">true positive rate</text>"#, pad + size / 2.0 + 50.0, pad + size / 2.0 + 50.0);
    s.push_str("</svg>\n");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn psd_for(
    ctx: &Ctx,
    labels: &BTreeMap<String, bool>,
    segments: &BTreeMap<String, Vec<CoughSegment>>,
) -> Result<PsdReport> {
    let fcfg = &ctx.cfg.features;
    let uuids: Vec<&String> = labels.keys().collect();
    let per_rec: Vec<Vec<(crate::features::PsdCurve, bool)>> = uuids
        .par_iter()
        .map(|u| {
            let Some(segs) = segments.get(*u) else { return Ok(Vec::new()) };
            let signal: AudioSignal = load_audio(ctx.path(&preprocessed_file(u)))?;
            let rate = signal.sample_rate() as f64;
            segs.iter()
                .map(|s| Ok((normalized_psd(s.slice(signal.samples()), rate, fcfg.psd_nperseg)?, labels[*u])))
                .collect()
        })
        .collect::<Result<_>>()?;
    let (curves, positive): (Vec<_>, Vec<_>) = per_rec.into_iter().flatten().unzip();
    class_psd_report(&curves, &positive, &fcfg.psd_bands)
}

/// Class-average PSD curves and band tests for user and SSL labels on the
/// training partition, the final ROC curves and the SHAP ranking.
pub fn run_report(cfg: &PipelineConfig) -> Result<()> {
    let mut ctx = Ctx::new(cfg, Stage::Report)?;
    let features = read_features(ctx.need(Stage::Features, FEATURES_CSV)?)?;
    let records = read_labels(ctx.need(Stage::SslRelabel, LABELS_CSV)?)?;
    let (train, _) = read_split(&ctx.need(Stage::TrainExperts, SPLIT_CSV)?)?;
    let segments = segments_by_recording(read_segments(&ctx.need(Stage::Segment, SEGMENTS_CSV)?)?);
    let model = TrainedModel::load_json(ctx.need(Stage::TrainFinal, FINAL_MODEL_JSON)?)?;
    let roc_ssl = read_roc(&ctx.need(Stage::Evaluate, ROC_SSL_CSV)?)?;
    let roc_raw = read_roc(&ctx.need(Stage::Evaluate, ROC_RAW_CSV)?)?;
    for u in &train {
        ctx.need(Stage::Preprocess, &preprocessed_file(u))?;
    }
    let annotators = annotators_of(&records);
    let max_freq = ctx.cfg.preprocess.target_rate as f64 / 2.0;

    let mut tests = Vec::new();
    let mut outputs = Vec::new();
    for scheme in [LabelScheme::User, LabelScheme::Agreement(cfg.ssl.scheme)] {
        let labels = labels_in(&records, &annotators, scheme, &train)?;
        let report = psd_for(&ctx, &labels, &segments)?;
        let stem = format!("psd_{}", scheme.name());
        write_psd_csv(&report, ctx.path(&format!("{stem}.csv")))?;
        write_psd_svg(
            &report,
            &format!("Average normalized PSD, {} labels", scheme.name()),
            max_freq,
            ctx.path(&format!("{stem}.svg")),
        )?;
        outputs.push(format!("{stem}.csv"));
        outputs.push(format!("{stem}.svg"));
        tests.extend(report.bands.into_iter().map(|b| (scheme.name(), b)));
    }
    let path = ctx.path(BAND_TESTS_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record([
        "label_scheme",
        "band_lo_hz",
        "band_hi_hz",
        "mean_healthy",
        "mean_covid",
        "t",
        "df",
        "p_value",
        "log10_p",
    ])
    .map_err(|e| Error::csv(&path, e))?;
    for (scheme, b) in &tests {
        w.write_record([
            scheme.to_string(),
            b.band.0.to_string(),
            b.band.1.to_string(),
            b.mean_healthy.to_string(),
            b.mean_covid.to_string(),
            b.t.to_string(),
            b.df.to_string(),
            format!("{:e}", b.p_value),
            b.log10_p().to_string(),
        ])
        .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    write_roc_svg(
        &[("SSL labels", "firebrick", &roc_ssl), ("user labels", "steelblue", &roc_raw)],
        &ctx.path("roc.svg"),
    )?;

    let rows: Vec<Vec<f64>> = features.rows.iter().filter(|r| train.contains(&r.uuid)).map(|r| r.values.clone()).collect();
    let importance = shap_importance(&model.model.weights, &model.prepare(&rows));
    let mut ranked: Vec<(&str, f64)> = model.selected_names().into_iter().zip(importance).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let path = ctx.path(SHAP_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record(["rank", "feature", "mean_abs_shap"]).map_err(|e| Error::csv(&path, e))?;
    for (i, (name, v)) in ranked.iter().enumerate() {
        w.write_record([(i + 1).to_string(), name.to_string(), v.to_string()])
            .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    for f in outputs.iter().map(String::as_str).chain([BAND_TESTS_CSV, "roc.svg", SHAP_CSV]) {
        ctx.produced(f)?;
    }
    ctx.commit(Stage::Report)
}
