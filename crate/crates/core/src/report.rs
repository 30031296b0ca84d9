//! Structured experiment reports: one row per check, auxiliary tables, and
//! JSON or CSV output.
//!
//! The report body is deterministic for a fixed configuration and seed; wall
//! time lives in [`RunMetadata`], which is written separately.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::sampling::Estimate;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// `residual ≤ tolerance`.
    Check,
    /// `|z| ≤ tolerance` for an estimate against a target.
    MonteCarlo,
}

/// One verified statement. Every row carries its own tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub kind: RowKind,
    pub name: String,
    pub subject: String,
    pub residual: f64,
    pub tolerance: f64,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub target: Option<f64>,
    pub z_score: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn check(suite: &str, name: &str, subject: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.into(),
            kind: RowKind::Check,
            name: name.into(),
            subject: subject.into(),
            residual,
            tolerance,
            estimate: None,
            std_error: None,
            target: None,
            z_score: None,
            // NaN fails
            pass: residual <= tolerance,
        }
    }

    /// Passes when `|estimate − target| ≤ max_z · std_error`.
    pub fn monte_carlo(suite: &str, name: &str, subject: &str, estimate: Estimate, target: f64, max_z: f64) -> Self {
        let z = estimate.z_score(target);
        Self {
            suite: suite.into(),
            kind: RowKind::MonteCarlo,
            name: name.into(),
            subject: subject.into(),
            residual: (estimate.mean - target).abs(),
            tolerance: max_z,
            estimate: Some(estimate.mean),
            std_error: Some(estimate.std_error),
            target: Some(target),
            z_score: Some(z),
            pass: z.abs() <= max_z,
        }
    }
}

/// Named auxiliary table: a list of flat JSON objects.
pub type Table = Vec<Value>;

/// Converts serialisable records into a table.
pub fn table<T: Serialize>(records: &[T]) -> Result<Table> {
    records.iter().map(|r| Ok(serde_json::to_value(r)?)).collect()
}

/// Deterministic part of a run's metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportInfo {
    pub seed: u64,
    pub version: String,
}

/// Non-deterministic part of a run's metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub pass: bool,
    pub info: ReportInfo,
    /// The effective configuration.
    pub config: Value,
    pub rows: Vec<Row>,
    pub tables: BTreeMap<String, Table>,
}

/// `CARGO_PKG_VERSION` plus the git revision when the build saw one.
pub fn version_string() -> String {
    match option_env!("MALLIAVIN_KIT_GIT_REV") {
        Some(rev) => format!("{}+{rev}", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl ExperimentReport {
    pub fn new(suite: &str, seed: u64, config: Value) -> Self {
        Self {
            suite: suite.into(),
            pass: true,
            info: ReportInfo {
                seed,
                version: version_string(),
            },
            config,
            rows: Vec::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.pass &= row.pass;
        self.rows.push(row);
    }

    pub fn add_table(&mut self, name: &str, t: Table) {
        self.tables.entry(name.to_string()).or_default().extend(t);
    }

    /// Appends another report's rows and tables (used by the `all` suite).
    pub fn absorb(&mut self, other: ExperimentReport) {
        for r in other.rows {
            self.push(r);
        }
        for (k, t) in other.tables {
            self.add_table(&k, t);
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Pretty JSON of the report body.
    pub fn body_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// RFC-4180 CSV of the rows.
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8"))
    }

    /// CSV of one table; columns are the union of keys in sorted order.
    pub fn table_csv(&self, name: &str) -> Result<Option<String>> {
        let Some(t) = self.tables.get(name) else {
            return Ok(None);
        };
        let mut cols: Vec<String> = t
            .iter()
            .filter_map(Value::as_object)
            .flat_map(|o| o.keys().cloned())
            .collect();
        cols.sort();
        cols.dedup();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&cols)?;
        for rec in t {
            let fields = cols.iter().map(|c| match rec.get(c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            });
            w.write_record(fields)?;
        }
        Ok(Some(
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8"),
        ))
    }

    /// Writes the report to `path`. JSON is a single file; CSV writes the
    /// rows to `path` and each table to `<stem>.<table>.csv` next to it.
    /// Metadata goes to `<stem>.meta.json`. Returns the files written.
    pub fn write(&self, path: &Path, format: OutputFormat, meta: &RunMetadata) -> Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut written = vec![path.to_path_buf()];
        match format {
            OutputFormat::Json => fs::write(path, self.body_json()?)?,
            OutputFormat::Csv => {
                fs::write(path, self.rows_csv()?)?;
                for name in self.tables.keys() {
                    let p = sibling(path, &format!("{name}.csv"));
                    fs::write(&p, self.table_csv(name)?.unwrap_or_default())?;
                    written.push(p);
                }
            }
        }
        let p = sibling(path, "meta.json");
        fs::write(&p, serde_json::to_string_pretty(meta)? + "\n")?;
        written.push(p);
        Ok(written)
    }

    /// Fixed-width summary, one line per row.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let detail = match r.kind {
                RowKind::Check => format!("residual {:.3e} (tol {:.1e})", r.residual, r.tolerance),
                RowKind::MonteCarlo => format!(
                    "estimate {:.6} ± {:.2e} target {:.6} z {:+.2} (tol {})",
                    r.estimate.unwrap_or(f64::NAN),
                    r.std_error.unwrap_or(f64::NAN),
                    r.target.unwrap_or(f64::NAN),
                    r.z_score.unwrap_or(f64::NAN),
                    r.tolerance
                ),
            };
            out.push_str(&format!(
                "{} {:<12} {:<28} {:<22} {detail}\n",
                if r.pass { "PASS" } else { "FAIL" },
                r.suite,
                r.name,
                r.subject
            ));
        }
        let failing = self.failing().count();
        out.push_str(&format!(
            "{}: {} rows, {failing} failing\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.rows.len()
        ));
        out
    }
}

/// `dir/stem.suffix` for `dir/stem.ext`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", 3, serde_json::json!({"seed": 3}));
        r.push(Row::check("demo", "identity", "op, \"quoted\"", 1e-14, 1e-12));
        r.push(Row::monte_carlo(
            "demo",
            "moment",
            "W(h)",
            Estimate {
                mean: 1.01,
                std_error: 0.01,
                samples: 100,
            },
            1.0,
            3.0,
        ));
        r.add_table("grid", vec![serde_json::json!({"r": 0.5, "k": 1.0}), serde_json::json!({"r": 1.0, "kind": "a,b"})]);
        r
    }

    #[test]
    fn pass_is_conjunction() {
        let mut r = sample();
        assert!(r.pass);
        r.push(Row::check("demo", "bad", "x", f64::NAN, 1.0));
        assert!(!r.pass);
        assert_eq!(r.failing().count(), 1);
    }

    #[test]
    fn csv_quotes_and_unions_columns() {
        let r = sample();
        let rows = r.rows_csv().unwrap();
        assert!(rows.contains("\"op, \"\"quoted\"\"\""));
        let t = r.table_csv("grid").unwrap().unwrap();
        let mut lines = t.lines();
        assert_eq!(lines.next(), Some("k,kind,r"));
        assert_eq!(lines.next(), Some("1.0,,0.5"));
        assert_eq!(lines.next(), Some(",\"a,b\",1.0"));
    }

    #[test]
    fn body_is_single_object_with_rows() {
        let v: Value = serde_json::from_str(&sample().body_json().unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
        assert!(v.get("wall_time_s").is_none());
    }

    #[test]
    fn write_csv_siblings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let meta = RunMetadata {
            seed: 3,
            version: version_string(),
            wall_time_s: 0.5,
            threads: 1,
        };
        let files = sample().write(&path, OutputFormat::Csv, &meta).unwrap();
        assert_eq!(files.len(), 3);
        assert!(dir.path().join("out.grid.csv").exists());
        assert!(dir.path().join("out.meta.json").exists());
    }
}
