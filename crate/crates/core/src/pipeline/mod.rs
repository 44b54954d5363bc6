//! File-based pipeline: each stage reads the artifacts of earlier stages
//! from the output directory, writes its own and records content hashes in
//! `manifest.json`. A stage refuses to run on artifacts that are missing,
//! modified, or produced under a different configuration.

mod config;
mod manifest;
mod stages;

pub use config::{FilterParams, GenderParams, Paths, PipelineConfig, SslParams};
pub use manifest::{sha256_file, Manifest, StageRecord, MANIFEST_FILE};
pub use stages::*;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Preprocess,
    Segment,
    Features,
    TrainExperts,
    SslRelabel,
    TrainFinal,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Preprocess,
        Stage::Segment,
        Stage::Features,
        Stage::TrainExperts,
        Stage::SslRelabel,
        Stage::TrainFinal,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Segment => "segment",
            Stage::Features => "features",
            Stage::TrainExperts => "train-experts",
            Stage::SslRelabel => "ssl-relabel",
            Stage::TrainFinal => "train-final",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Self::ALL.into_iter().find(|st| st.name() == s)
    }
}

pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<()> {
    log::info!("stage {}", stage.name());
    match stage {
        Stage::Preprocess => run_preprocess(cfg),
        Stage::Segment => run_segment(cfg),
        Stage::Features => run_features(cfg),
        Stage::TrainExperts => run_train_experts(cfg),
        Stage::SslRelabel => run_ssl_relabel(cfg),
        Stage::TrainFinal => run_train_final(cfg),
        Stage::Evaluate => run_evaluate(cfg),
        Stage::Report => run_report(cfg),
    }
}

/// Every stage in order.
pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    for stage in Stage::ALL {
        run_stage(stage, cfg)?;
    }
    Ok(())
}
