// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Invariant checks, CSV output and the run manifest.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Fixed CSV number format: 17 significant digits, `.` decimal point. Negative
/// zero is written as zero.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Writes `name` under `dir` with a header row and `'\n'` line endings.
pub fn write_csv<I>(dir: &Path, name: &str, header: &[&str], rows: I) -> anyhow::Result<PathBuf>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        }
    }
}

/// One invariant with its measured residual.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    /// Passes iff `residual ≤ tolerance`; a NaN residual fails.
    pub fn bound(name: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, residual: Some(residual), tolerance: Some(tolerance), note: None }
    }

    /// `λ_min ≥ −tolerance`, reported as the residual `max(0, −λ_min)`.
    pub fn positivity(name: &str, min_eig: f64, tolerance: f64) -> Self {
        Self::bound(name, (-min_eig).max(0.0), tolerance).with_note(format!("minimum eigenvalue {min_eig:e}"))
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Skipped, residual: None, tolerance: None, note: Some(reason.into()) }
    }

    pub fn failed(name: &str, reason: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Fail, residual: None, tolerance: None, note: Some(reason.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// One human-readable line, e.g. `PASS trace 1.110e-16 (tolerance 1.0e-10)`.
    pub fn line(&self) -> String {
        let mut s = format!("{} {}", self.status.label(), self.name);
        match (self.residual, self.tolerance) {
            (Some(r), Some(t)) => s += &format!(" {r:.3e} (tolerance {t:.1e})"),
            (Some(r), None) => s += &format!(" {r:.3e}"),
            _ => {}
        }
        if let Some(note) = &self.note {
            s += &format!(": {note}");
        }
        s
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct InvariantSummary {
    pub checked: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
}

impl InvariantSummary {
    pub fn new(checks: Vec<Check>) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        Self { checked: checks.len(), failed: count(Status::Fail), skipped: count(Status::Skipped), checks }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    InvariantViolation,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::Error => 1,
            RunStatus::InvariantViolation => 2,
        }
    }
}

/// `manifest.json`, written after every run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub config_path: String,
    /// The parsed config with defaults filled in; `null` if parsing failed.
    pub config: serde_json::Value,
    pub library_version: &'static str,
    pub cli_version: &'static str,
    pub status: RunStatus,
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub invariants: InvariantSummary,
    pub summary: serde_json::Value,
}
