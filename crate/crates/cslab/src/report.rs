//! Scenario reports: a JSON summary (assertions, measured values, validity
//! flags) plus one CSV per functional sweep. Output is byte-deterministic:
//! struct-ordered JSON, shortest-roundtrip float formatting, no timestamps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// How a measured value is compared against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// One named property check with its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparator: Comparator,
    pub passed: bool,
    /// Context (member, spec, resolution tag, ...), empty when obvious.
    pub detail: String,
}

impl AssertionResult {
    pub fn le(name: impl Into<String>, measured: f64, threshold: f64) -> AssertionResult {
        AssertionResult {
            name: name.into(),
            measured,
            threshold,
            comparator: Comparator::Le,
            passed: measured <= threshold && measured.is_finite(),
            detail: String::new(),
        }
    }

    pub fn ge(name: impl Into<String>, measured: f64, threshold: f64) -> AssertionResult {
        AssertionResult {
            name: name.into(),
            measured,
            threshold,
            comparator: Comparator::Ge,
            passed: measured >= threshold && measured.is_finite(),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> AssertionResult {
        self.detail = detail.into();
        self
    }

    /// Force-pass marker for purely reported quantities (measured constants
    /// the estimates do not pin down).
    pub fn reported(name: impl Into<String>, measured: f64) -> AssertionResult {
        AssertionResult {
            name: name.into(),
            measured,
            threshold: f64::INFINITY,
            comparator: Comparator::Le,
            passed: measured.is_finite(),
            detail: "reported value, no asserted bound".into(),
        }
    }
}

/// One row of a sweep table; the CSV column schema is fixed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub member_id: String,
    pub r_or_t: f64,
    pub value: f64,
    pub reference_norm: f64,
    pub ratio: f64,
    pub resolution_tag: String,
}

/// A named sweep emitted as one CSV file.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub rows: Vec<SweepRow>,
}

/// Run validity, distinct from assertion outcomes: blow-up or an
/// outer-shell mass violation marks the scenario invalid.
#[derive(Debug, Clone, Serialize)]
pub struct RunValidity {
    pub valid: bool,
    pub reasons: Vec<String>,
}

impl RunValidity {
    pub fn valid() -> RunValidity {
        RunValidity {
            valid: true,
            reasons: Vec::new(),
        }
    }

    pub fn invalidate(&mut self, reason: impl Into<String>) {
        self.valid = false;
        self.reasons.push(reason.into());
    }
}

/// Full scenario outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub validity: RunValidity,
    pub assertions: Vec<AssertionResult>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub sweeps: Vec<SweepTable>,
    /// Names of the sweep CSVs, serialized in place of the tables.
    pub sweep_files: Vec<String>,
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> ScenarioReport {
        ScenarioReport {
            scenario: scenario.to_string(),
            validity: RunValidity::valid(),
            assertions: Vec::new(),
            notes: Vec::new(),
            sweeps: Vec::new(),
            sweep_files: Vec::new(),
        }
    }

    pub fn push_assertion(&mut self, a: AssertionResult) {
        self.assertions.push(a);
    }

    pub fn push_sweep(&mut self, table: SweepTable) {
        self.sweep_files
            .push(format!("{}__{}.csv", self.scenario, table.name));
        self.sweeps.push(table);
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// CLI exit code: 0 all assertions pass, 1 assertion failure,
    /// 2 invalid run.
    pub fn exit_code(&self) -> i32 {
        if !self.validity.valid {
            2
        } else if self.all_passed() {
            0
        } else {
            1
        }
    }
}

fn csv_for(table: &SweepTable) -> String {
    let mut out = String::new();
    out.push_str("scenario,member_id,R_or_t,value,reference_norm,ratio,resolution_tag\n");
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.scenario,
            row.member_id,
            row.r_or_t,
            row.value,
            row.reference_norm,
            row.ratio,
            row.resolution_tag
        )
        .expect("string write");
    }
    out
}

/// Write the JSON summary and one CSV per sweep into `dir`. Returns the
/// written paths. Re-running produces byte-identical files.
pub fn write_report(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}.json", report.scenario));
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::Io {
        path: json_path.clone(),
        source: e,
    })?;
    written.push(json_path);
    for table in &report.sweeps {
        let path = dir.join(format!("{}__{}.csv", report.scenario, table.name));
        std::fs::write(&path, csv_for(table)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        written.push(path);
    }
    Ok(written)
}
