//! Machine-readable run reports.
//!
//! Reals are rounded to 12 significant digits when they enter a report, so
//! the JSON text carries at most 12 digits and parses back to the same
//! values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// A real rounded to [`SIGNIFICANT_DIGITS`].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Real(f64);

impl Real {
    pub fn new(x: f64) -> Self {
        Self(round_significant(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Real {
    /// Plain decimals in the usual range, exponent notation for tiny or huge values.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e12).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(Real),
    Vector(Vec<Real>),
    Flag(bool),
    Text(String),
}

impl Value {
    pub fn real(x: f64) -> Self {
        Value::Real(Real::new(x))
    }

    pub fn vector(xs: impl IntoIterator<Item = f64>) -> Self {
        Value::Vector(xs.into_iter().map(Real::new).collect())
    }

    fn render(&self) -> String {
        match self {
            Value::Real(x) => x.to_string(),
            Value::Vector(xs) => xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
            Value::Flag(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: Real,
    pub tolerance: Real,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn within(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured: Real::new(measured),
            tolerance: Real::new(tolerance),
        }
    }

    pub fn with_verdict(name: impl Into<String>, passed: bool, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed, measured: Real::new(measured), tolerance: Real::new(tolerance) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Real>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = f64>) {
        let row: Vec<Real> = row.into_iter().map(Real::new).collect();
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// Only recorded on request, so that default reports are reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<Real>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), ..Default::default() }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn output(&mut self, key: &str, value: Value) -> &mut Self {
        self.outputs.insert(key.to_string(), value);
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn emit_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => emit_csv(report),
        Format::Text => emit_text(report),
    }
}

pub fn parse_report(json: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(json)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn emit_csv(report: &RunReport) -> String {
    let mut out = String::new();
    if let Some(table) = &report.table {
        let header: Vec<String> = table.columns.iter().map(|c| csv_field(c)).collect();
        writeln!(out, "{}", header.join(",")).unwrap();
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        return out;
    }
    writeln!(out, "kind,name,value,passed,tolerance").unwrap();
    for (k, v) in &report.inputs {
        writeln!(out, "input,{},{},,", csv_field(k), csv_field(v)).unwrap();
    }
    for (k, v) in &report.outputs {
        writeln!(out, "output,{},{},,", csv_field(k), csv_field(&v.render())).unwrap();
    }
    for c in &report.checks {
        writeln!(out, "check,{},{},{},{}", csv_field(&c.name), c.measured, c.passed, c.tolerance).unwrap();
    }
    out
}

fn emit_text(report: &RunReport) -> String {
    let mut out = String::new();
    writeln!(out, "command: {}", report.command).unwrap();
    if !report.inputs.is_empty() {
        writeln!(out, "inputs:").unwrap();
        for (k, v) in &report.inputs {
            writeln!(out, "  {k} = {v}").unwrap();
        }
    }
    if !report.outputs.is_empty() {
        writeln!(out, "outputs:").unwrap();
        for (k, v) in &report.outputs {
            writeln!(out, "  {k} = {}", v.render()).unwrap();
        }
    }
    if let Some(table) = &report.table {
        writeln!(out, "table: {}", table.columns.join(" ")).unwrap();
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "  {}", cells.join(" ")).unwrap();
        }
    }
    writeln!(out, "checks:").unwrap();
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "  [{verdict}] {} (measured {}, tolerance {})", c.name, c.measured, c.tolerance).unwrap();
    }
    if let Some(ms) = report.duration_ms {
        writeln!(out, "duration_ms: {ms}").unwrap();
    }
    out
}
