use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{BinaryLabel, LabelRecord, LabelSource, SslStatus, UserStatus};
use crate::error::{Error, Result};

const SOURCE_PREFIX: &str = "label_source_";
const EXPERT_PREFIX: &str = "expert_";

/// Writes the relabeled table: `uuid,status,status_SSL` followed by an
/// `expert_<id>,label_source_<id>` pair per annotator.
pub fn write_labels(records: &[LabelRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let annotators: BTreeSet<&String> = records
        .iter()
        .flat_map(|r| r.expert_or_pseudo.keys())
        .collect();

    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["uuid".to_string(), "status".into(), "status_SSL".into()];
    for a in &annotators {
        header.push(format!("{EXPERT_PREFIX}{a}"));
        header.push(format!("{SOURCE_PREFIX}{a}"));
    }
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;

    for r in records {
        let mut row = vec![
            r.uuid.clone(),
            r.user_status.as_cell().to_string(),
            r.ssl_status.as_cell().to_string(),
        ];
        for a in &annotators {
            row.push(
                r.expert_or_pseudo
                    .get(*a)
                    .map(|l| l.as_cell().to_string())
                    .unwrap_or_default(),
            );
            row.push(
                r.label_source
                    .get(*a)
                    .map(|s| s.as_cell().to_string())
                    .unwrap_or_default(),
            );
        }
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a table produced by [`write_labels`].
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let uuid_col = find("uuid")?;
    let status_col = find("status")?;
    let ssl_col = find("status_SSL")?;
    let mut slots = Vec::new();
    for h in headers.iter() {
        if let Some(id) = h.strip_prefix(EXPERT_PREFIX) {
            let source_col = find(&format!("{SOURCE_PREFIX}{id}"))?;
            slots.push((id.to_string(), find(h)?, source_col));
        }
    }

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::csv(path, e))?;
        let malformed = |column: &str, reason: String| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            reason,
        };
        let get = |c: usize| row.get(c).unwrap_or("");
        let user_status = UserStatus::parse(get(status_col))
            .ok_or_else(|| malformed("status", format!("unknown status `{}`", get(status_col))))?;
        let ssl_status = SslStatus::parse(get(ssl_col))
            .ok_or_else(|| malformed("status_SSL", format!("unknown value `{}`", get(ssl_col))))?;
        let mut expert_or_pseudo = BTreeMap::new();
        let mut label_source = BTreeMap::new();
        for (id, label_col, source_col) in &slots {
            let label_cell = get(*label_col);
            if label_cell.is_empty() {
                continue;
            }
            let label = BinaryLabel::parse(label_cell).ok_or_else(|| {
                malformed(&format!("{EXPERT_PREFIX}{id}"), format!("unknown label `{label_cell}`"))
            })?;
            let source = LabelSource::parse(get(*source_col)).ok_or_else(|| {
                malformed(
                    &format!("{SOURCE_PREFIX}{id}"),
                    format!("unknown source `{}`", get(*source_col)),
                )
            })?;
            expert_or_pseudo.insert(id.clone(), label);
            label_source.insert(id.clone(), source);
        }
        out.push(LabelRecord {
            uuid: get(uuid_col).to_string(),
            user_status,
            expert_or_pseudo,
            label_source,
            ssl_status,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ssl_status_cells() {
        let rec = |s| LabelRecord {
            uuid: "u".into(),
            user_status: UserStatus::Covid,
            expert_or_pseudo: [("1".to_string(), BinaryLabel::Covid)].into(),
            label_source: [("1".to_string(), LabelSource::PseudoModel)].into(),
            ssl_status: s,
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_labels(&[rec(SslStatus::Covid), rec(SslStatus::Discarded)], f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "uuid,status,status_SSL,expert_1,label_source_1");
        assert_eq!(lines[1], "u,COVID-19,COVID-19,COVID-19,pseudo_model");
        assert_eq!(lines[2], "u,COVID-19,discarded,COVID-19,pseudo_model");
    }
}
