// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Per-command JSON configs. Every config is a flat object; unknown keys are
//! rejected so that a typo cannot silently fall back to a default. An optional
//! `"command"` key is accepted and must match the command being run.

use anyhow::{bail, Context};
use clap::ValueEnum;
use lmg_core::bosonic_oracle::{OracleModel, DEFAULT_CUTOFF};
use lmg_core::dynamics::InitialKind;
use lmg_core::lmg_model::{BandLimit, DEFAULT_SUPEROPERATOR_BUDGET};
use lmg_core::spectral::{DEFAULT_PAIR_TOL, DEFAULT_PAIR_WINDOW};
use lmg_core::ModelParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    GapScan,
    Stationary,
    Dynamics,
    Analytic,
    Oracle,
    Audit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::GapScan => "gap-scan",
            Command::Stationary => "stationary",
            Command::Dynamics => "dynamics",
            Command::Analytic => "analytic",
            Command::Oracle => "oracle",
            Command::Audit => "audit",
        }
    }
}

/// Parses `text` as the config of `command`.
pub fn parse<T: DeserializeOwned>(command: Command, text: &str) -> anyhow::Result<T> {
    let mut value: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
    let Some(object) = value.as_object_mut() else {
        bail!("config must be a JSON object");
    };
    if let Some(named) = object.remove("command") {
        if named.as_str() != Some(command.name()) {
            bail!("config is for command {named}, not \"{}\"", command.name());
        }
    }
    serde_json::from_value(value).with_context(|| format!("invalid {} config", command.name()))
}

fn model_params(s: f64, lambda: f64, gamma: f64, t: f64) -> anyhow::Result<ModelParams> {
    Ok(ModelParams::new(s, lambda, gamma, t)?)
}

fn band(window: Option<f64>) -> anyhow::Result<Option<BandLimit>> {
    match window {
        Some(w) if !(w > 0.0 && w.is_finite()) => bail!("band_window must be positive, got {w}"),
        Some(w) => Ok(Some(BandLimit::GapUnits(w))),
        None => Ok(None),
    }
}

fn time_grid(t_end: f64, n_t: usize) -> anyhow::Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) || n_t < 2 {
        bail!("time grid needs t_end > 0 and n_t ≥ 2 (t_end = {t_end}, n_t = {n_t})");
    }
    let dt = t_end / (n_t - 1) as f64;
    Ok((0..n_t).map(|k| if k + 1 == n_t { t_end } else { k as f64 * dt }).collect())
}

fn default_budget() -> usize {
    DEFAULT_SUPEROPERATOR_BUDGET
}
fn default_pair_tol() -> f64 {
    DEFAULT_PAIR_TOL
}
fn default_pair_window() -> usize {
    DEFAULT_PAIR_WINDOW
}
fn default_n_max() -> usize {
    DEFAULT_CUTOFF
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_true() -> bool {
    true
}
fn default_two() -> u64 {
    2
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(rename = "S")]
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// Number of `H_S` eigenstates kept; the full superoperator when absent.
    #[serde(rename = "K", default)]
    pub k: Option<usize>,
    /// `|E_i − E_j| ≤ band_window·ω_b` on the restricted operator basis.
    #[serde(default)]
    pub band_window: Option<f64>,
    /// Largest `d²` accepted for the full superoperator.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_pair_tol")]
    pub pair_tol: f64,
    #[serde(default = "default_pair_window")]
    pub pair_window: usize,
}

impl SpectrumConfig {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        model_params(self.s, self.lambda, self.gamma, self.t)
    }

    pub fn band(&self) -> anyhow::Result<Option<BandLimit>> {
        band(self.band_window)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GapScanConfig {
    #[serde(rename = "S")]
    pub s: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub lambdas: Vec<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub band_window: Option<f64>,
}

impl GapScanConfig {
    /// Template parameters; the coupling is replaced per grid point.
    pub fn template(&self) -> anyhow::Result<ModelParams> {
        let first = *self.lambdas.first().context("lambdas is empty")?;
        model_params(self.s, first, self.gamma, self.t)
    }

    pub fn band(&self) -> anyhow::Result<Option<BandLimit>> {
        band(self.band_window)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryConfig {
    #[serde(rename = "S")]
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K", default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub band_window: Option<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Also write `ρ₊,₀ + cρ₋,₀` with maximal positive `c`, oriented towards
    /// `⟨S_x⟩ > 0`.
    #[serde(default)]
    pub symmetry_broken: bool,
}

impl StationaryConfig {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        model_params(self.s, self.lambda, self.gamma, self.t)
    }

    pub fn band(&self) -> anyhow::Result<Option<BandLimit>> {
        band(self.band_window)
    }
}

/// Axis the rotation angle `theta` is measured from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaReference {
    /// `θ` is the angle from `z`.
    #[default]
    Z,
    /// `θ` is added to the classical angle `θ₀ = arccos(1/Λ)` (zero for `Λ < 1`).
    Classical,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(rename = "S")]
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub initial: InitialKind,
    pub theta: f64,
    #[serde(default)]
    pub theta_reference: ThetaReference,
    pub t_end: f64,
    pub n_t: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Record the smallest eigenvalue of `ρ` at every grid time.
    #[serde(default = "default_true")]
    pub min_eig: bool,
    /// Also write the bosonized prediction on the same grid.
    #[serde(default)]
    pub analytic: bool,
}

impl DynamicsConfig {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        model_params(self.s, self.lambda, self.gamma, self.t)
    }

    pub fn grid(&self) -> anyhow::Result<Vec<f64>> {
        time_grid(self.t_end, self.n_t)
    }

    /// Angle from `z` of the initial rotation.
    pub fn absolute_theta(&self) -> anyhow::Result<f64> {
        Ok(match self.theta_reference {
            ThetaReference::Z => self.theta,
            ThetaReference::Classical => self.theta + lmg_core::hp_analytic::semiclassical_magnetization(self.lambda)?.0,
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    #[serde(rename = "S")]
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub theta: f64,
    pub t_end: f64,
    pub n_t: usize,
}

impl AnalyticConfig {
    pub fn grid(&self) -> anyhow::Result<Vec<f64>> {
        time_grid(self.t_end, self.n_t)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub model: OracleModel,
    #[serde(default = "default_two")]
    pub max_delta: u64,
    #[serde(default = "default_two")]
    pub max_n: u64,
}

fn default_audit_s() -> f64 {
    10.0
}
fn default_audit_lambda() -> f64 {
    0.5
}
fn default_audit_gamma() -> f64 {
    0.2
}
fn default_audit_t() -> f64 {
    1.0
}
fn default_audit_theta() -> f64 {
    0.3
}

/// Every field has a default, so `{}` is a valid audit config.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(rename = "S", default = "default_audit_s")]
    pub s: f64,
    #[serde(default = "default_audit_lambda")]
    pub lambda: f64,
    #[serde(default = "default_audit_gamma")]
    pub gamma: f64,
    #[serde(rename = "T", default = "default_audit_t")]
    pub t: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Initial rotation for the audit trajectory.
    #[serde(default = "default_audit_theta")]
    pub theta: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        parse(Command::Audit, "{}").expect("empty audit config is valid")
    }
}

impl AuditConfig {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        model_params(self.s, self.lambda, self.gamma, self.t)
    }
}
