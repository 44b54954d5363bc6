use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryLabel, LabelRecord, SslStatus};
use crate::error::{Error, Result};

/// Rule combining the expert-or-pseudo labels of a recording with its
/// uploader's self-label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementScheme {
    /// Every expert slot and the user label agree.
    Universal,
    /// Every expert slot agrees; the user label is ignored.
    Expert,
    /// Every expert slot agrees, or at least half of them (rounded up)
    /// agree with the user label.
    #[default]
    Majority,
}

impl AgreementScheme {
    pub const ALL: [AgreementScheme; 3] = [AgreementScheme::Universal, AgreementScheme::Expert, AgreementScheme::Majority];

    pub fn name(self) -> &'static str {
        match self {
            AgreementScheme::Universal => "universal",
            AgreementScheme::Expert => "expert",
            AgreementScheme::Majority => "majority",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s.trim().to_ascii_lowercase())
    }
}

/// Covid and healthy counts over the annotator slots of `record`.
fn slot_counts(record: &LabelRecord, annotators: &[String]) -> Result<(usize, usize)> {
    if annotators.is_empty() {
        return Err(Error::InvalidParameter("agreement needs at least one annotator".into()));
    }
    let mut covid = 0;
    for a in annotators {
        match record.expert_or_pseudo.get(a) {
            Some(BinaryLabel::Covid) => covid += 1,
            Some(BinaryLabel::Healthy) => {}
            None => {
                return Err(Error::MissingSlot {
                    uuid: record.uuid.clone(),
                    annotator: a.clone(),
                })
            }
        }
    }
    Ok((covid, annotators.len() - covid))
}

pub fn apply_agreement(record: &LabelRecord, annotators: &[String], scheme: AgreementScheme) -> Result<SslStatus> {
    let (covid, healthy) = slot_counts(record, annotators)?;
    let k = annotators.len();
    let unanimous = if covid == k {
        Some(BinaryLabel::Covid)
    } else if healthy == k {
        Some(BinaryLabel::Healthy)
    } else {
        None
    };
    let user = record.user_status.binary();
    let kept = match scheme {
        AgreementScheme::Universal => unanimous.filter(|&l| user == Some(l)),
        AgreementScheme::Expert => unanimous,
        AgreementScheme::Majority => unanimous.or_else(|| {
            let needed = k.div_ceil(2);
            user.filter(|&l| {
                let votes = if l.is_positive() { covid } else { healthy };
                votes >= needed
            })
        }),
    };
    Ok(kept.map(SslStatus::from).unwrap_or(SslStatus::Discarded))
}

/// True when a majority of slots agree, the user label contradicts them and
/// the majority scheme therefore discards the recording.
pub fn majority_conflict(record: &LabelRecord, annotators: &[String]) -> Result<bool> {
    let Some(user) = record.user_status.binary() else {
        return Ok(false);
    };
    if apply_agreement(record, annotators, AgreementScheme::Majority)? != SslStatus::Discarded {
        return Ok(false);
    }
    let (covid, healthy) = slot_counts(record, annotators)?;
    let needed = annotators.len().div_ceil(2);
    let other = if user.is_positive() { healthy } else { covid };
    Ok(other >= needed)
}
