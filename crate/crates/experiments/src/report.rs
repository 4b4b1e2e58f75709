//! Experiment reports (JSON) and tables (CSV), and the single writer that
//! persists them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{ExperimentError, Result};

/// One pass/fail assertion against a declared tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    /// `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: format!("{value:e} <= {threshold:e}"),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: None,
            threshold: None,
            detail: detail.into(),
        }
    }
}

/// Structured record of one run. Everything serialised here is a pure
/// function of the config; wall-clock time is kept out of it and written to
/// a separate timing file.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub files: Vec<String>,
    #[serde(skip)]
    pub duration: Duration,
}

impl ExperimentReport {
    pub fn new(experiment: Experiment, config: &ExperimentConfig) -> Self {
        Self {
            experiment,
            seed: config.seed(),
            config: config.clone(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            files: Vec::new(),
            duration: Duration::ZERO,
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|s| s.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Output of an experiment before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub tables: Vec<Table>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write `<name>.csv` for each table, `<experiment>.json` for the report and
/// `<experiment>.timing.json` with the wall-clock duration. Returns the paths
/// written.
pub fn persist(output: &mut ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    output.report.files = output
        .tables
        .iter()
        .map(|t| format!("{}.csv", t.name))
        .collect();
    for table in &output.tables {
        let path = dir.join(format!("{}.csv", table.name));
        write_file(&path, &table.to_csv_string()?)?;
        written.push(path);
    }
    let slug = output.report.experiment.slug();
    let path = dir.join(format!("{slug}.json"));
    let mut json = serde_json::to_string_pretty(&output.report)?;
    json.push('\n');
    write_file(&path, &json)?;
    written.push(path);

    let timing = serde_json::json!({
        "experiment": slug,
        "wall_clock_seconds": output.report.duration.as_secs_f64(),
    });
    let path = dir.join(format!("{slug}.timing.json"));
    write_file(&path, &format!("{}\n", serde_json::to_string_pretty(&timing)?))?;
    written.push(path);
    Ok(written)
}

/// Render a float for CSV output: shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_fold_into_passed() {
        let mut r = ExperimentReport::new(Experiment::Example1, &ExperimentConfig::default());
        r.check(Check::at_most("a", 1e-13, 1e-12));
        assert!(r.passed);
        r.check(Check::holds("b", false, "nope"));
        assert!(!r.passed);
        assert_eq!(r.failed_checks().count(), 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push([fmt_f64(0.1), "tag".to_string()]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n0.1,tag\n");
        assert_eq!(t.column("b").unwrap(), vec!["tag"]);
    }
}
