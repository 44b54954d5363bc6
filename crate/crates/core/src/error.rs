use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: line {line}, column `{column}`: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        column: String,
        reason: String,
    },

    #[error("{path}: duplicate uuid `{uuid}` on lines {first_line} and {second_line}")]
    DuplicateUuid {
        path: PathBuf,
        uuid: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("WAV decode failed in `{chunk}` chunk: {reason}")]
    Wav { chunk: String, reason: String },

    #[error("recording `{uuid}` has no SNR estimate; run SNR estimation (the `segment` stage) first")]
    MissingSnr { uuid: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cannot normalize an all-zero signal")]
    ZeroSignal,

    #[error("SNR undefined: {0}")]
    UndefinedSnr(String),

    #[error("segment too short: {len} samples, need at least {required}")]
    SegmentTooShort { len: usize, required: usize },

    #[error("both classes are required: {0}")]
    SingleClass(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no eligible annotator: {0}")]
    NoEligibleAnnotator(String),

    #[error("record `{uuid}` is missing the label slot for annotator `{annotator}`")]
    MissingSlot { uuid: String, annotator: String },

    #[error("unequal rater counts: item {item} has {found} ratings, expected {expected}")]
    UnequalRaters {
        item: usize,
        expected: usize,
        found: usize,
    },

    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` output is missing or stale ({detail}); rerun `{stage}`")]
    StaleArtifact { stage: String, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
