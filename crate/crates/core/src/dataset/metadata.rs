use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{Corpus, ExpertLabel, Gender, RecordingMeta, UserStatus};
use crate::error::{Error, Result};

const EXPERT_PREFIX: &str = "expert_";

/// Reads a metadata table with columns
/// `uuid,status,cough_detected,SNR,gender,expert_<id>...`.
///
/// Extra columns are ignored. Blank `status`, `gender` and expert cells map
/// to their absent variants; a blank `SNR` leaves `snr_db` unset.
pub fn load_metadata(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyInput(format!("{}: no header row", path.display())));
    }

    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| {
        col(name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let uuid_col = required("uuid")?;
    let status_col = col("status");
    let cough_col = col("cough_detected");
    let snr_col = col("SNR");
    let gender_col = col("gender");
    let expert_cols: Vec<(String, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            h.trim()
                .strip_prefix(EXPERT_PREFIX)
                .map(|id| (id.to_string(), i))
        })
        .collect();

    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        // header is line 1
        let line = row_idx as u64 + 2;
        let row = row.map_err(|e| Error::csv(path, e))?;
        let cell = |i: Option<usize>| i.and_then(|i| row.get(i)).unwrap_or("").trim();
        let malformed = |column: &str, reason: String| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            reason,
        };

        let uuid = cell(Some(uuid_col)).to_string();
        if uuid.is_empty() {
            return Err(malformed("uuid", "empty uuid".into()));
        }
        if let Some(&first_line) = seen.get(&uuid) {
            return Err(Error::DuplicateUuid {
                path: path.to_path_buf(),
                uuid,
                first_line,
                second_line: line,
            });
        }
        seen.insert(uuid.clone(), line);

        let status_cell = cell(status_col);
        let user_status = UserStatus::parse(status_cell)
            .ok_or_else(|| malformed("status", format!("unknown status `{status_cell}`")))?;

        let cough_cell = cell(cough_col);
        let cough_score = if cough_cell.is_empty() {
            0.0
        } else {
            let v: f64 = cough_cell
                .parse()
                .map_err(|_| malformed("cough_detected", format!("not a number: `{cough_cell}`")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(malformed(
                    "cough_detected",
                    format!("{v} is outside [0, 1]"),
                ));
            }
            v
        };

        let snr_cell = cell(snr_col);
        let snr_db = if snr_cell.is_empty() {
            None
        } else {
            let v: f64 = snr_cell
                .parse()
                .map_err(|_| malformed("SNR", format!("not a number: `{snr_cell}`")))?;
            if v.is_nan() {
                return Err(malformed("SNR", "NaN".into()));
            }
            Some(v)
        };

        let gender = Gender::parse(cell(gender_col));
        let expert_labels: BTreeMap<String, ExpertLabel> = expert_cols
            .iter()
            .map(|(id, i)| (id.clone(), ExpertLabel::parse(cell(Some(*i)))))
            .collect();

        records.push(RecordingMeta {
            uuid,
            user_status,
            expert_labels,
            gender,
            cough_score,
            snr_db,
        });
    }

    Ok(Corpus {
        annotators: expert_cols.into_iter().map(|(id, _)| id).collect(),
        records,
    })
}

/// Writes the metadata table in the same column convention that
/// [`load_metadata`] reads.
pub fn write_metadata(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec![
        "uuid".to_string(),
        "status".into(),
        "cough_detected".into(),
        "SNR".into(),
        "gender".into(),
    ];
    header.extend(corpus.annotators.iter().map(|a| format!("{EXPERT_PREFIX}{a}")));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for r in &corpus.records {
        let mut row = vec![
            r.uuid.clone(),
            r.user_status.as_cell().to_string(),
            format!("{}", r.cough_score),
            r.snr_db.map(|s| format!("{s}")).unwrap_or_default(),
            r.gender.as_cell().to_string(),
        ];
        row.extend(
            corpus
                .annotators
                .iter()
                .map(|a| r.expert_label(a).as_cell().to_string()),
        );
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Keeps recordings whose cough-detector score and SNR both strictly exceed
/// the thresholds.
pub fn filter_corpus(corpus: &Corpus, min_cough_score: f64, min_snr_db: f64) -> Result<Corpus> {
    let mut kept = Vec::new();
    for r in &corpus.records {
        let snr = r.snr_db.ok_or_else(|| Error::MissingSnr {
            uuid: r.uuid.clone(),
        })?;
        if r.cough_score > min_cough_score && snr > min_snr_db {
            kept.push(r.clone());
        }
    }
    Ok(Corpus {
        annotators: corpus.annotators.clone(),
        records: kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_status_vocabulary() {
        let f = write_tmp(
            "uuid,status,cough_detected,SNR,gender,expert_1,expert_2\n\
             a,COVID-19,0.9,7.5,male,COVID-19,\n\
             b,,0.5,,female,healthy_cough,upper_infection\n\
             c,symptomatic,0.95,3,,,\n",
        );
        let c = load_metadata(f.path()).unwrap();
        assert_eq!(c.annotators, vec!["1", "2"]);
        assert_eq!(c.records[0].user_status, UserStatus::Covid);
        assert_eq!(c.records[0].expert_label("1"), ExpertLabel::Covid);
        assert_eq!(c.records[0].expert_label("2"), ExpertLabel::None);
        assert_eq!(c.records[1].user_status, UserStatus::None);
        assert_eq!(c.records[1].snr_db, None);
        assert_eq!(c.records[1].expert_label("2"), ExpertLabel::Other);
        assert_eq!(c.records[2].user_status, UserStatus::Symptomatic);
        assert_eq!(c.records[2].gender, Gender::Unknown);
        assert_eq!(c.records[2].user_status.binary(), None);
    }

    #[test]
    fn duplicate_uuid_lists_both_lines() {
        let f = write_tmp("uuid,status\nx,healthy\ny,healthy\nx,COVID-19\n");
        match load_metadata(f.path()) {
            Err(Error::DuplicateUuid {
                uuid,
                first_line,
                second_line,
                ..
            }) => {
                assert_eq!(uuid, "x");
                assert_eq!((first_line, second_line), (2, 4));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_cell_names_line_and_column() {
        let f = write_tmp("uuid,status,cough_detected\na,healthy,0.3\nb,healthy,high\n");
        let err = load_metadata(f.path()).unwrap_err();
        match &err {
            Error::MalformedRow { line, column, .. } => {
                assert_eq!(*line, 3);
                assert_eq!(column, "cough_detected");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn cough_score_out_of_range_rejected() {
        let f = write_tmp("uuid,cough_detected\na,1.5\n");
        assert!(matches!(
            load_metadata(f.path()),
            Err(Error::MalformedRow { .. })
        ));
    }

    fn meta(uuid: &str, score: f64, snr: Option<f64>) -> RecordingMeta {
        RecordingMeta {
            uuid: uuid.into(),
            user_status: UserStatus::None,
            expert_labels: BTreeMap::new(),
            gender: Gender::Unknown,
            cough_score: score,
            snr_db: snr,
        }
    }

    #[test]
    fn filter_uses_strict_inequalities() {
        let corpus = Corpus {
            annotators: vec![],
            records: vec![
                meta("keep", 0.81, Some(6.0)),
                meta("edge_score", 0.8, Some(6.0)),
                meta("edge_snr", 0.9, Some(5.0)),
            ],
        };
        let kept = filter_corpus(&corpus, 0.8, 5.0).unwrap();
        let ids: Vec<_> = kept.records.iter().map(|r| r.uuid.as_str()).collect();
        assert_eq!(ids, vec!["keep"]);
        assert!(filter_corpus(&Corpus::default(), 0.8, 5.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn filter_requires_snr() {
        let corpus = Corpus {
            annotators: vec![],
            records: vec![meta("a", 0.9, None)],
        };
        let err = filter_corpus(&corpus, 0.8, 5.0).unwrap_err();
        assert!(err.to_string().contains("segment"));
    }

    #[test]
    fn metadata_round_trip() {
        let f = write_tmp(
            "uuid,status,cough_detected,SNR,gender,expert_1\n\
             a,COVID-19,0.9,7.5,male,COVID-19\n\
             b,,0.5,,,other\n",
        );
        let c = load_metadata(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_metadata(&c, out.path()).unwrap();
        assert_eq!(load_metadata(out.path()).unwrap(), c);
    }
}
