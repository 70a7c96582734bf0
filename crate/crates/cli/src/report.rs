//! Run reports: provenance-tagged JSON plus plot-ready CSV.

use std::fs;
use std::path::{Path, PathBuf};

use liftlab::Provenance;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;

/// Outcome class of a run; decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// A truncation gate failed.
    NotConverged,
    /// A proven inequality failed on computed numbers.
    Violation,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 2,
            Status::Violation => 3,
        }
    }
}

/// A named pass/fail check recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a command produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Result payload; numbers are tagged with `provenance` unless an
    /// enclosing object names its own.
    pub results: Value,
    pub provenance: Provenance,
    /// Proven inequalities evaluated on the results; a failure is a violation.
    pub checks: Vec<Check>,
    /// False when a truncation gate failed.
    pub converged: bool,
    /// Plot data: file suffix (empty for the main CSV) and contents.
    pub tables: Vec<(String, Csv)>,
}

impl Outcome {
    pub fn new(results: Value, provenance: Provenance) -> Self {
        Self { results, provenance, checks: Vec::new(), converged: true, tables: Vec::new() }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn table(&mut self, suffix: &str, csv: Csv) {
        self.tables.push((suffix.to_string(), csv));
    }

    pub fn status(&self) -> Status {
        if self.checks.iter().any(|c| !c.passed) {
            Status::Violation
        } else if !self.converged {
            Status::NotConverged
        } else {
            Status::Ok
        }
    }
}

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        let mut s = line(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&line(r));
            s.push('\n');
        }
        s
    }
}

/// RFC 4180 quoting for cells holding commas, quotes or line breaks.
fn quote(cell: &str) -> std::borrow::Cow<'_, str> {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\"")).into()
    } else {
        cell.into()
    }
}

/// Shortest round-trip formatting for CSV cells; empty for absent values.
pub fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v}"))
}

/// A tagged number `{"value": x, "provenance": p}`.
pub fn tagged(value: f64, provenance: Provenance) -> Value {
    json!({ "value": value, "provenance": provenance })
}

fn is_tagged(map: &Map<String, Value>) -> bool {
    map.len() == 2 && map.contains_key("value") && map.contains_key("provenance")
}

/// Wrap every bare number in `{value, provenance}`. An object with its own
/// `provenance` key passes it down to its members.
pub fn tag_numbers(value: Value, provenance: Provenance) -> Value {
    match value {
        Value::Number(_) => json!({ "value": value, "provenance": provenance }),
        Value::Array(items) => Value::Array(items.into_iter().map(|v| tag_numbers(v, provenance)).collect()),
        Value::Object(map) if is_tagged(&map) => Value::Object(map),
        Value::Object(map) => {
            let own = map
                .get("provenance")
                .and_then(|p| serde_json::from_value::<Provenance>(p.clone()).ok())
                .unwrap_or(provenance);
            Value::Object(
                map.into_iter()
                    .map(|(k, v)| if k == "provenance" { (k, v) } else { (k, tag_numbers(v, own)) })
                    .collect(),
            )
        }
        other => other,
    }
}

/// The written report.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub status: Status,
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: ExperimentConfig, outcome: &Outcome) -> Self {
        Self {
            tool: "liftlab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            status: outcome.status(),
            results: tag_numbers(outcome.results.clone(), outcome.provenance),
            checks: outcome.checks.clone(),
            artifacts: Vec::new(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Where the report and the plot data go for a given `--out`.
///
/// A `.csv` path receives the main table and the report goes next to it
/// as `.json`; any other path receives the report and the table goes next
/// to it as `.csv`. Extra tables get `_<suffix>` before the extension.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub report: PathBuf,
    stem: PathBuf,
}

impl OutputPaths {
    pub fn for_out(out: &Path) -> Self {
        let stem = out.with_extension("");
        let report =
            if out.extension().is_some_and(|e| e == "csv") { out.with_extension("json") } else { out.to_path_buf() };
        Self { report, stem }
    }

    pub fn table(&self, suffix: &str) -> PathBuf {
        let mut name = self.stem.file_name().map(|s| s.to_os_string()).unwrap_or_default();
        if !suffix.is_empty() {
            name.push(format!("_{suffix}"));
        }
        name.push(".csv");
        self.stem.with_file_name(name)
    }
}

/// Write tables and the report; returns the report text.
pub fn write_outputs(report: &mut RunReport, outcome: &Outcome, out: Option<&Path>) -> std::io::Result<String> {
    if let Some(out) = out {
        let paths = OutputPaths::for_out(out);
        if let Some(dir) = paths.report.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        for (suffix, csv) in &outcome.tables {
            let path = paths.table(suffix);
            fs::write(&path, csv.render())?;
            report.artifacts.push(file_name(&path));
        }
        report.artifacts.push(file_name(&paths.report));
        let text = report.to_json();
        fs::write(&paths.report, &text)?;
        Ok(text)
    } else {
        Ok(report.to_json())
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}
