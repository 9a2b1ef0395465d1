//! CSV and JSON artifacts, written atomically.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Round-trip exact: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Config(format!("csv: {e}"));
        w.write_record(&self.header).map_err(wrap)?;
        for r in &self.rows {
            w.write_record(r).map_err(wrap)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Config(format!("csv: {e}")))
    }
}

/// Column names for the coordinates of a point in `C^n`.
pub fn point_columns(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["re".into(), "im".into()];
    }
    (1..=n)
        .flat_map(|i| [format!("re_z{i}"), format!("im_z{i}")])
        .collect()
}

pub fn point_cells(z: &[grauert_core::holo::Complex64]) -> Vec<String> {
    z.iter()
        .flat_map(|w| [fmt_f64(w.re), fmt_f64(w.im)])
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    Csv(Table),
    Json(Value),
}

impl Artifact {
    pub fn bytes(&self) -> CliResult<Vec<u8>> {
        match self {
            Artifact::Csv(t) => t.to_csv(),
            Artifact::Json(v) => {
                let mut s = serde_json::to_string_pretty(v)
                    .map_err(|e| CliError::Config(format!("json: {e}")))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves no partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
