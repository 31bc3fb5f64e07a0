//! Output directory, tabular writers and the run manifest.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

impl TableFormat {
    fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Missing values are empty in CSV and `null` in JSON.
    Opt(Option<f64>),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) | Cell::Opt(Some(v)) => fmt_f64(*v),
            Cell::Opt(None) => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        let num = |v: f64| {
            serde_json::Number::from_f64(v).map_or_else(|| serde_json::Value::String(fmt_f64(v)), serde_json::Value::Number)
        };
        match self {
            Cell::Num(v) | Cell::Opt(Some(v)) => num(*v),
            Cell::Opt(None) => serde_json::Value::Null,
            Cell::Int(i) => (*i).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Opt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Row-major grid whose header row holds `axis2` values and whose first
    /// column holds `axis1` values.
    pub fn grid(corner: &str, axis1: &[f64], axis2: &[f64], values: &[Option<f64>]) -> Self {
        let mut t = Table::new(std::iter::once(corner.to_string()).chain(axis2.iter().map(|v| fmt_f64(*v))));
        for (i, v1) in axis1.iter().enumerate() {
            let mut row = vec![Cell::Num(*v1)];
            row.extend(values[i * axis2.len()..(i + 1) * axis2.len()].iter().map(|v| Cell::Opt(*v)));
            t.push(row);
        }
        t
    }

    fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Other(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Other(format!("csv: {e}")))
    }

    fn to_json(&self) -> CliResult<Vec<u8>> {
        let rows: Vec<Vec<serde_json::Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Other(format!("json: {e}")))
    }
}

/// Everything written by one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_source: String,
    /// The resolved config, seed overrides applied; also written as
    /// `config.toml` next to the data.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub warnings: Vec<String>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub duration_secs: f64,
    /// `false` until every artifact has been written.
    pub complete: bool,
}

pub const MANIFEST: &str = "manifest.json";

pub struct OutputDir {
    root: PathBuf,
    pub format: TableFormat,
    manifest: Mutex<RunManifest>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path, format: TableFormat, manifest: RunManifest) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(CliError::io(root))?;
        let out = Self {
            root: root.to_path_buf(),
            format,
            manifest: Mutex::new(manifest),
            started: Instant::now(),
        };
        out.flush_manifest()?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn record(&self, name: &str) {
        let mut m = self.manifest.lock().unwrap();
        if !m.artifacts.iter().any(|a| a == name) {
            m.artifacts.push(name.to_string());
        }
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.record(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Other(format!("json: {e}")))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes `stem.csv` or `stem.json` depending on the selected format and
    /// returns the file name.
    pub fn write_table(&self, stem: &str, table: &Table) -> CliResult<String> {
        let name = format!("{stem}.{}", self.format.extension());
        let bytes = match self.format {
            TableFormat::Csv => table.to_csv()?,
            TableFormat::Json => table.to_json()?,
        };
        self.write_bytes(&name, &bytes)?;
        Ok(name)
    }

    /// Writes an image through `draw`; drawing failures become warnings so
    /// that data outputs are never lost to a rendering problem.
    pub fn write_image(&self, name: &str, draw: impl FnOnce(&Path) -> Result<(), String>) {
        match draw(&self.path(name)) {
            Ok(()) => self.record(name),
            Err(e) => self.warn(format!("image {name} not written: {e}")),
        }
    }

    pub fn warn(&self, msg: String) {
        eprintln!("warning: {msg}");
        self.manifest.lock().unwrap().warnings.push(msg);
    }

    /// Rewrites the manifest with the current artifact list.
    pub fn flush_manifest(&self) -> CliResult<()> {
        let mut m = self.manifest.lock().unwrap().clone();
        m.duration_secs = self.started.elapsed().as_secs_f64();
        let mut bytes = serde_json::to_vec_pretty(&m).map_err(|e| CliError::Other(format!("json: {e}")))?;
        bytes.push(b'\n');
        let path = self.path(MANIFEST);
        let tmp = self.path(".manifest.json.tmp");
        std::fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(CliError::io(&path))
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        self.manifest.lock().unwrap().complete = true;
        self.flush_manifest()?;
        let mut m = self.manifest.into_inner().unwrap();
        m.duration_secs = self.started.elapsed().as_secs_f64();
        Ok(m)
    }
}
