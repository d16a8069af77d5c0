//! Profile tables as CSV with columns `x, value, field, run_id`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profiles::LineProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub x: f64,
    pub value: f64,
    pub field: String,
    pub run_id: String,
}

fn csv_err(path: &Path, e: ::csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Writes the profiles one after another. An empty input gives a header-only file.
pub fn export_csv(profiles: &[&LineProfile], run_id: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = ::csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["x", "value", "field", "run_id"]).map_err(|e| csv_err(path, e))?;
    for p in profiles {
        for (&x, &value) in p.x.iter().zip(&p.values) {
            w.serialize(CsvRow {
                x,
                value,
                field: p.field.clone(),
                run_id: run_id.to_string(),
            })
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let mut r = ::csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

/// Writes serialisable rows with a header taken from the field names.
pub fn write_table<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = ::csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
