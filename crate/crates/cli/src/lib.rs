// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario runner for the dissipative LMG model: one command per process,
//! a flat JSON config in, CSV files and a `manifest.json` out.

pub mod audit;
pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

pub use config::Command;
use report::{InvariantSummary, Manifest, Report, RunStatus};

/// Result of one run, after the manifest has been written.
#[derive(Debug)]
pub struct Outcome {
    pub status: RunStatus,
    pub manifest: Manifest,
}

fn parsed<T: Serialize>(cfg: T, resolved: &mut serde_json::Value) -> anyhow::Result<T> {
    *resolved = serde_json::to_value(&cfg)?;
    Ok(cfg)
}

fn execute(command: Command, text: &str, out: &Path, resolved: &mut serde_json::Value) -> anyhow::Result<Report> {
    match command {
        Command::Spectrum => commands::spectrum(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::GapScan => commands::gap_scan(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::Stationary => commands::stationary(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::Dynamics => commands::dynamics(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::Analytic => commands::analytic(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::Oracle => commands::oracle(&parsed(config::parse(command, text)?, resolved)?, out),
        Command::Audit => audit::audit(&parsed(config::parse(command, text)?, resolved)?, out),
    }
}

/// Runs `command` with the config at `config_path`, writing into `out`.
/// The manifest is written whatever happens; the returned error is only for
/// the case where even that is impossible.
pub fn run(command: Command, config_path: &Path, out: &Path) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let mut resolved = serde_json::Value::Null;
    let result = std::fs::read_to_string(config_path)
        .with_context(|| format!("cannot read config {}", config_path.display()))
        .and_then(|text| execute(command, &text, out, &mut resolved));
    let (status, error, report) = match result {
        Ok(report) if report.checks.iter().all(|c| c.passed()) => (RunStatus::Ok, None, report),
        Ok(report) => (RunStatus::InvariantViolation, None, report),
        Err(e) => (RunStatus::Error, Some(format!("{e:#}")), Report::default()),
    };
    let manifest = Manifest {
        command: command.name(),
        config_path: config_path.display().to_string(),
        config: resolved,
        library_version: lmg_core::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        status,
        error,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: report.outputs.iter().map(|p| p.display().to_string()).collect(),
        invariants: InvariantSummary::new(report.checks),
        summary: report.summary,
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(Outcome { status, manifest })
}
