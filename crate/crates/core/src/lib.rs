//! Relabeling of crowdsourced cough recordings: audio pre-processing, cough
//! segmentation, per-cough features, per-annotator classifiers whose
//! pseudo-labels are combined with the uploader's label by an agreement
//! scheme, and the reports used to judge the relabeled set.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod dsp;
pub mod error;
pub mod features;
pub mod gender;
pub mod ml;
pub mod pipeline;
pub mod segmentation;
pub mod ssl;
pub mod stats;
pub mod synth;
pub mod tpe;
pub mod train;

pub use error::{Error, Result};
