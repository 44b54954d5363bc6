//! Agreement schemes on hand-made label records, Fleiss' kappa across the
//! synthetic annotators, and Jensen-Shannon separability.

use cough_ssl::dataset::{BinaryLabel, ExpertLabel, LabelRecord, LabelSource, SslStatus, UserStatus};
use cough_ssl::ml::{fleiss_kappa, jensen_shannon, JS_BINS};
use cough_ssl::ssl::{apply_agreement, AgreementScheme};
use cough_ssl::synth::{generate, SynthConfig};

fn record(user: UserStatus, votes: [bool; 3]) -> LabelRecord {
    let ids = ["1", "2", "3"];
    LabelRecord {
        uuid: "demo".into(),
        user_status: user,
        expert_or_pseudo: ids.iter().zip(votes).map(|(a, v)| (a.to_string(), BinaryLabel::from_positive(v))).collect(),
        label_source: ids.iter().map(|a| (a.to_string(), LabelSource::PseudoModel)).collect(),
        ssl_status: SslStatus::Discarded,
    }
}

fn main() -> cough_ssl::Result<()> {
    let annotators: Vec<String> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
    let cases = [
        (UserStatus::Covid, [true, true, true]),
        (UserStatus::Healthy, [true, true, true]),
        (UserStatus::Covid, [true, true, false]),
        (UserStatus::Healthy, [true, true, false]),
        (UserStatus::None, [false, false, true]),
    ];
    println!("{:<12} {:<22} {:<10} {:<10} {:<10}", "user", "models", "universal", "expert", "majority");
    for (user, votes) in cases {
        let r = record(user, votes);
        let cell = |s| apply_agreement(&r, &annotators, s).map(|v| v.as_cell());
        println!(
            "{:<12} {:<22} {:<10} {:<10} {:<10}",
            format!("{user:?}"),
            format!("{votes:?}"),
            cell(AgreementScheme::Universal)?,
            cell(AgreementScheme::Expert)?,
            cell(AgreementScheme::Majority)?
        );
    }

    // Kappa over recordings that every annotator labeled COVID-19 or healthy.
    let synth = generate(&SynthConfig { n_recordings: 400, annotator_coverage: 1.0, ..SynthConfig::default() })?;
    let counts: Vec<Vec<usize>> = synth
        .corpus
        .records
        .iter()
        .filter_map(|r| {
            let labels: Vec<ExpertLabel> = annotators.iter().map(|a| r.expert_label(a)).collect();
            let pos = labels.iter().filter(|&&l| l == ExpertLabel::Covid).count();
            let neg = labels.iter().filter(|&&l| l == ExpertLabel::Healthy).count();
            (pos + neg == labels.len()).then_some(vec![pos, neg])
        })
        .collect();
    println!("\nFleiss' kappa over {} recordings: {:.3}", counts.len(), fleiss_kappa(&counts)?);

    let a: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
    let b: Vec<f64> = a.iter().map(|v| v + 0.5).collect();
    let c: Vec<f64> = a.iter().map(|v| v + 10.0).collect();
    println!(
        "JS divergence: same {:.4}, shifted {:.4}, disjoint {:.4}",
        jensen_shannon(&a, &a, JS_BINS)?,
        jensen_shannon(&a, &b, JS_BINS)?,
        jensen_shannon(&a, &c, JS_BINS)?
    );
    Ok(())
}
