//! Tabular artifacts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Flag(bool),
}

impl Cell {
    /// Floats use 17 significant digits so that values round-trip exactly.
    pub fn render(self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) if x.is_nan() => "NaN".into(),
            Cell::Float(x) => (if x > 0.0 { "inf" } else { "-inf" }).into(),
            Cell::Int(n) => n.to_string(),
            Cell::Flag(b) => u8::from(b).to_string(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => json!(n),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), c.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        fs::write(path, serde_json::to_string_pretty(&rows).unwrap_or_default() + "\n")?;
        Ok(())
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf, CliError> {
        let path = match format {
            Format::Csv => dir.join(format!("{}.csv", self.name)),
            Format::Json => dir.join(format!("{}.json", self.name)),
        };
        match format {
            Format::Csv => self.write_csv(&path)?,
            Format::Json => self.write_json(&path)?,
        }
        Ok(path)
    }
}

/// Manifest with the resolved config, library version and artifact names.
/// Carries no timestamps, so identical runs give identical manifests.
pub fn write_manifest(dir: &Path, config: &RunConfig, workers: usize, files: &[PathBuf]) -> Result<PathBuf, CliError> {
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "experiment": config.experiment.name(),
        "library": "polaritonix",
        "library_version": polaritonix::VERSION,
        "workers": workers,
        "config": config.resolved(),
        "outputs": names,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(s.is_ascii() && !s.contains(','));
        }
    }

    #[test]
    fn non_finite_values_are_spelled_out() {
        assert_eq!(Cell::Float(f64::NAN).render(), "NaN");
        assert_eq!(Cell::Float(f64::NEG_INFINITY).render(), "-inf");
        assert_eq!(Cell::Flag(true).render(), "1");
    }
}
