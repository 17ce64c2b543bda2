//! CSV tables and the sidecar manifest.
//!
//! Floats are written with 17 significant digits so every value round-trips.
//! Nothing time- or host-dependent goes into either file, so identical
//! configurations produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::Failure;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    /// Value not defined for this row.
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> Result<String, Failure> {
        Ok(match self {
            Cell::Num(v) if !v.is_finite() => {
                return Err(Failure::numerical(format!("non-finite value {v} in output")));
            }
            Cell::Num(v) => fmt_f64(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        })
    }
}

/// One experiment's output before it is written.
#[derive(Debug, Clone, Default)]
pub struct Table {
    /// Resolved parameters followed by experiment-specific facts.
    pub header: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Derived scalars, written as trailing `#` lines and into the manifest.
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn render(&self) -> Result<String, Failure> {
        let mut s = String::new();
        for (k, v) in &self.header {
            writeln!(s, "# {k}={v}").unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let cells = row.iter().map(Cell::render).collect::<Result<Vec<_>, _>>()?;
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        for (k, v) in &self.summary {
            writeln!(s, "# summary {k}={v}").unwrap();
        }
        Ok(s)
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub csv: String,
    pub config_file: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub columns: Vec<&'static str>,
    pub rows: usize,
    pub summary: BTreeMap<String, String>,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the CSV and its manifest.
pub fn write_run(table: &Table, experiment: &str, csv: &Path, config_file: Option<&Path>) -> Result<PathBuf, Failure> {
    let body = table.render()?;
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.to_string(),
        csv: csv.display().to_string(),
        config_file: config_file.map(|p| p.display().to_string()),
        parameters: table.header.iter().cloned().collect(),
        columns: table.columns.clone(),
        rows: table.rows.len(),
        summary: table.summary.iter().cloned().collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let io = |p: &Path, e: std::io::Error| Failure::precondition(format!("cannot write {}: {e}", p.display()));
    std::fs::write(csv, body).map_err(|e| io(csv, e))?;
    let mpath = manifest_path(csv);
    std::fs::write(&mpath, json + "\n").map_err(|e| io(&mpath, e))?;
    Ok(mpath)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn table_layout() {
        let t = Table {
            header: vec![("kappa".into(), fmt_f64(8.0))],
            columns: vec!["a", "b"],
            rows: vec![vec![Cell::Num(0.5), Cell::Empty], vec![Cell::Text("x,y".into()), Cell::Bool(true)]],
            summary: vec![("ratio".into(), "1".into())],
        };
        assert_eq!(
            t.render().unwrap(),
            "# kappa=8.0000000000000000e0\na,b\n5.0000000000000000e-1,\n\"x,y\",true\n# summary ratio=1\n"
        );
    }

    #[test]
    fn non_finite_cells_are_numerical_failures() {
        let t = Table { columns: vec!["a"], rows: vec![vec![Cell::Num(f64::NAN)]], ..Table::default() };
        assert_eq!(t.render().unwrap_err().exit_code(), 3);
    }
}
