//! CSV, JSON and plot-manifest writers.
//!
//! CSV files start with `#` comment lines carrying the version, the command
//! and the resolved configuration as one-line JSON. Floats are written with
//! 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => format_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// 17 significant digits; non-finite values as `nan`, `inf`, `-inf`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// One column table with its metadata.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// An entry of the plot manifest: which columns of which file make a figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotEntry {
    pub file: String,
    pub title: String,
    pub x: String,
    pub y: Vec<String>,
}

/// Where and how a command writes.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
    pub command: &'static str,
    pub config: Value,
    written: Vec<PathBuf>,
    plots: Vec<PlotEntry>,
}

impl Sink {
    pub fn new(dir: impl Into<PathBuf>, format: Format, command: &'static str, config: Value) -> anyhow::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, format, command, config, written: Vec::new(), plots: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes `<stem>.csv` if CSV output is enabled.
    pub fn csv(&mut self, stem: &str, table: &Table) -> anyhow::Result<()> {
        if !self.format.csv() {
            return Ok(());
        }
        let path = self.dir.join(format!("{stem}.csv"));
        write_csv(&path, self.command, &self.config, table)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `<stem>.json` if JSON output is enabled.
    pub fn json(&mut self, stem: &str, results: Value, diagnostics: Value) -> anyhow::Result<()> {
        if !self.format.json() {
            return Ok(());
        }
        let path = self.dir.join(format!("{stem}.json"));
        write_json(&path, self.command, &self.config, results, diagnostics)?;
        self.written.push(path);
        Ok(())
    }

    pub fn plot(&mut self, stem: &str, title: impl Into<String>, x: &str, y: &[&str]) {
        if self.format.csv() {
            self.plots.push(PlotEntry {
                file: format!("{stem}.csv"),
                title: title.into(),
                x: x.into(),
                y: y.iter().map(|s| s.to_string()).collect(),
            });
        }
    }

    /// Writes `<command>_plots.json` when any plot was registered.
    pub fn finish(mut self) -> anyhow::Result<Vec<PathBuf>> {
        if !self.plots.is_empty() {
            let path = self.dir.join(format!("{}_plots.json", self.command.replace('-', "_")));
            let body = json!({ "version": VERSION, "command": self.command, "plots": self.plots });
            fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
            self.written.push(path);
        }
        Ok(self.written)
    }
}

pub fn write_csv(path: &Path, command: &str, config: &Value, table: &Table) -> anyhow::Result<()> {
    let mut file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "# {VERSION}")?;
    writeln!(file, "# command: {command}")?;
    writeln!(file, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, command: &str, config: &Value, results: Value, diagnostics: Value) -> anyhow::Result<()> {
    let body = json!({
        "version": VERSION,
        "command": command,
        "config": config,
        "results": results,
        "diagnostics": diagnostics,
    });
    fs::write(path, serde_json::to_string_pretty(&body)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads the data rows of a CSV written by [`write_csv`], skipping comments.
pub fn read_csv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.map(|x| x.iter().map(String::from).collect())).collect::<Result<_, _>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_has_header_and_reads_back() {
        let dir = std::env::temp_dir().join(format!("thinfilm-out-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.5.into(), "x".into()]);
        write_csv(&path, "test", &json!({"n": 0.1}), &t).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("# {VERSION}\n# command: test\n# config: {{\"n\":0.1}}\n")));
        let (h, rows) = read_csv(&path).unwrap();
        assert_eq!(h, ["a", "b"]);
        assert_eq!(rows[0][0].parse::<f64>().unwrap(), 1.5);
        fs::remove_dir_all(&dir).unwrap();
    }
}
