//! Plot-ready CSV tables: a row of column names, a row of units, then data.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A table in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(names: &[&str], units: &[&str]) -> Self {
        Table {
            names: names.iter().map(|s| s.to_string()).collect(),
            units: units.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.names.len());
        self.rows.push(row);
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn to_csv_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let enc = |e: csv::Error| CliError::Param(format!("csv encoding: {e}"));
        w.write_record(&self.names).map_err(enc)?;
        w.write_record(&self.units).map_err(enc)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| fmt_real(*v))).map_err(enc)?;
        }
        w.into_inner().map_err(|e| CliError::Param(format!("csv encoding: {e}")))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let bytes = self.to_csv_bytes()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(&bytes).map_err(|e| CliError::io(path, e))
    }

    /// Reads a table written by [`Table::write`]; every data field must be a
    /// real number.
    pub fn read(path: &Path) -> CliResult<Table> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
        let mut names = Vec::new();
        let mut units = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i as u64 + 1;
            let rec = rec.map_err(|e| CliError::Parse { path: path.to_path_buf(), line, msg: e.to_string() })?;
            match i {
                0 => names = rec.iter().map(str::to_string).collect(),
                1 => units = rec.iter().map(str::to_string).collect(),
                _ => {
                    if rec.len() != names.len() {
                        return Err(CliError::Parse {
                            path: path.to_path_buf(),
                            line,
                            msg: format!("expected {} fields, found {}", names.len(), rec.len()),
                        });
                    }
                    let row = rec
                        .iter()
                        .map(|s| {
                            s.trim().parse::<f64>().map_err(|_| CliError::Parse {
                                path: path.to_path_buf(),
                                line,
                                msg: format!("not a number: {s:?}"),
                            })
                        })
                        .collect::<CliResult<Vec<f64>>>()?;
                    rows.push(row);
                }
            }
        }
        if names.is_empty() {
            return Err(CliError::Parse { path: path.to_path_buf(), line: 1, msg: "missing header".into() });
        }
        Ok(Table { names, units, rows })
    }
}

/// `(t, value)` columns of a two-column series file.
pub fn read_series(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let t = Table::read(path)?;
    if t.names.len() < 2 {
        return Err(CliError::Parse { path: path.to_path_buf(), line: 1, msg: "need at least two columns".into() });
    }
    Ok((t.column(0), t.column(1)))
}
