//! CSV import and export of observation batches.

use std::path::Path;

use thiserror::Error;

use crate::error::Error as CoreError;
use crate::scalar::Real;
use crate::types::ObservationBatch;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: cannot parse {value:?} as a number")]
    Parse { line: u64, value: String },
    #[error("header has {header} columns, expected {expected}")]
    Header { header: usize, expected: usize },
    #[error(transparent)]
    Data(#[from] CoreError),
}

/// Writes `batch` with a one-line header of column names.
pub fn write_csv<T: Real>(
    path: impl AsRef<Path>,
    columns: &[String],
    batch: &ObservationBatch<T>,
) -> Result<(), DatasetError> {
    if columns.len() != batch.dim() {
        return Err(DatasetError::Header {
            header: columns.len(),
            expected: batch.dim(),
        });
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    let mut rec = Vec::with_capacity(batch.dim());
    for row in batch.rows() {
        rec.clear();
        // `{:?}` prints the shortest representation that round-trips.
        rec.extend(row.iter().map(|v| format!("{:?}", v.to_f64_lossy())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`], returning the header and the data.
pub fn read_csv<T: Real>(
    path: impl AsRef<Path>,
) -> Result<(Vec<String>, ObservationBatch<T>), DatasetError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(DatasetError::Header {
                header: header.len(),
                expected: rec.len(),
            });
        }
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| DatasetError::Parse {
                line,
                value: field.to_owned(),
            })?;
            data.push(T::of(v));
        }
    }
    let batch = ObservationBatch::from_flat(header.len(), data)?;
    Ok((header, batch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let rows = vec![vec![0.1, -2.5e-17, 1.0], vec![3.0, 1.0 / 3.0, 0.0]];
        let batch = ObservationBatch::<f64>::from_rows(&rows).unwrap();
        let names: Vec<String> = ["c1", "t", "y"].iter().map(|s| s.to_string()).collect();
        write_csv(&path, &names, &batch).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("c1,t,y\n"));
        let (h, back) = read_csv::<f64>(&path).unwrap();
        assert_eq!(h, names);
        assert_eq!(back, batch);
    }

    #[test]
    fn bad_field_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "x1\n1.0\nabc\n").unwrap();
        assert!(matches!(
            read_csv::<f64>(&path),
            Err(DatasetError::Parse { .. })
        ));
    }
}
