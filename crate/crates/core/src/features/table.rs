use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub uuid: String,
    pub segment_index: usize,
    pub values: Vec<f64>,
}

/// Feature vectors for every segment of a corpus, sharing one name list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        FeatureTable { names, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Row indices grouped by recording, in first-appearance order.
    pub fn rows_by_recording(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            match index.get(&r.uuid) {
                Some(&slot) => out[slot].1.push(i),
                None => {
                    index.insert(r.uuid.clone(), out.len());
                    out.push((r.uuid.clone(), vec![i]));
                }
            }
        }
        out
    }

    /// Appends one column, with the value for each row given by recording.
    pub fn push_column(&mut self, name: &str, value_for: impl Fn(&str) -> f64) {
        self.names.push(name.to_string());
        for r in &mut self.rows {
            r.values.push(value_for(&r.uuid));
        }
    }

    /// Keeps rows whose recording passes `keep`.
    pub fn filter_recordings(&self, keep: impl Fn(&str) -> bool) -> FeatureTable {
        FeatureTable {
            names: self.names.clone(),
            rows: self.rows.iter().filter(|r| keep(&r.uuid)).cloned().collect(),
        }
    }
}

/// `uuid,segment,<feature names...>`. Values use Rust's shortest
/// round-trip float formatting, so reading back is lossless.
pub fn write_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["uuid".to_string(), "segment".to_string()];
    header.extend(table.names.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for r in &table.rows {
        let mut row = vec![r.uuid.clone(), r.segment_index.to_string()];
        row.extend(r.values.iter().map(|v| format!("{v}")));
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.len() < 2 || &headers[0] != "uuid" || &headers[1] != "segment" {
        return Err(Error::MissingColumn {
            path: path.to_path_buf(),
            column: "uuid,segment".into(),
        });
    }
    let names: Vec<String> = headers.iter().skip(2).map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let malformed = |column: &str, reason: String| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            reason,
        };
        let segment_index = rec[1]
            .parse()
            .map_err(|_| malformed("segment", format!("not an index: `{}`", &rec[1])))?;
        let mut values = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let cell = &rec[j + 2];
            let v: f64 = cell
                .parse()
                .map_err(|_| malformed(name, format!("not a number: `{cell}`")))?;
            values.push(v);
        }
        rows.push(FeatureRow {
            uuid: rec[0].to_string(),
            segment_index,
            values,
        });
    }
    Ok(FeatureTable { names, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut t = FeatureTable::new(vec!["a".into(), "b".into()]);
        t.rows.push(FeatureRow { uuid: "r1".into(), segment_index: 0, values: vec![0.1 + 0.2, -1e-300] });
        t.rows.push(FeatureRow { uuid: "r1".into(), segment_index: 1, values: vec![std::f64::consts::PI, 5.0] });
        let f = tempfile::NamedTempFile::new().unwrap();
        write_features(&t, f.path()).unwrap();
        assert_eq!(read_features(f.path()).unwrap(), t);
        assert_eq!(t.rows_by_recording(), vec![("r1".to_string(), vec![0, 1])]);
    }
}
