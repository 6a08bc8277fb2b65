//! CSV ingestion and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::{to_frechet, SampleMatrix};

/// How input columns are brought to standard Fréchet scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Margins {
    /// Rank transform each column.
    Rank,
    /// Values are already standard Fréchet.
    Frechet,
}

/// Parses a comma-separated numeric matrix, optionally skipping one header
/// row. Rows and columns in errors are 0-based data positions.
pub fn parse_csv_matrix<R: std::io::Read>(reader: R, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: r,
                col: c,
                text: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
            row.push(v);
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::RaggedRow {
                    row: r,
                    expected: first,
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_csv_matrix(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    parse_csv_matrix(std::fs::File::open(path)?, has_header)
}

/// Reads a CSV file and returns it on standard Fréchet scale.
pub fn load_sample(path: &Path, has_header: bool, margins: Margins) -> Result<SampleMatrix> {
    let rows = read_csv_matrix(path, has_header)?;
    match margins {
        Margins::Rank => to_frechet(&rows),
        Margins::Frechet => SampleMatrix::from_rows(&rows),
    }
}

/// CSV text of a sample, one row per line, full precision.
pub fn sample_to_csv(x: &SampleMatrix) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in x.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
