// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact data of the quadratic bosonic Lindbladian for arbitrary `γ`:
//! rapidities, the stationary two-point matrix `Z`, and Wick moments.

use serde::Serialize;

use crate::hp_analytic::HpParams;
use crate::linalg::{c64, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThirdQuantResult {
    pub beta_plus: C64,
    pub beta_minus: C64,
    /// `Z₁₁ = Z₂₂`.
    pub z11: C64,
    pub z12: f64,
}

impl ThirdQuantResult {
    /// `⟨o₁ o₂⟩` for two ladder operators in the given order.
    pub fn pair(&self, first: Ladder, second: Ladder) -> C64 {
        match (first, second) {
            (Ladder::Lower, Ladder::Lower) => self.z11,
            (Ladder::Raise, Ladder::Raise) => self.z11.conj(),
            (Ladder::Raise, Ladder::Lower) => c64(self.z12, 0.0),
            (Ladder::Lower, Ladder::Raise) => c64(self.z12 + 1.0, 0.0),
        }
    }
}

/// `b` or `b†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// `β± = ¼(m_zγ ± i√(4ω_b² − m_z²γ²))`, principal square root. Above
/// `m_zγ = 2ω_b` both are real; at the threshold they coincide.
pub fn rapidities(coupling: f64, dissipation: f64) -> Result<(C64, C64)> {
    check_gamma(dissipation)?;
    let hp = HpParams::new(coupling, 1.0)?;
    Ok(rapidities_of(&hp, dissipation))
}

fn rapidities_of(hp: &HpParams, dissipation: f64) -> (C64, C64) {
    let g = hp.mz() * dissipation;
    let root = c64(4.0 * hp.omega_b * hp.omega_b - g * g, 0.0).sqrt();
    let i_root = root * c64(0.0, 1.0);
    ((c64(g, 0.0) + i_root) / 4.0, (c64(g, 0.0) - i_root) / 4.0)
}

fn check_gamma(dissipation: f64) -> Result<()> {
    if !(dissipation >= 0.0 && dissipation.is_finite()) {
        return Err(Error::InvalidParameter(format!("dissipation γ must be ≥ 0, got {dissipation}")));
    }
    Ok(())
}

/// `−2(β₊n₊ + β₋n₋)` for non-negative `n±`.
pub fn eigenvalue_lattice(coupling: f64, dissipation: f64, n_plus: u64, n_minus: u64) -> Result<C64> {
    let (bp, bm) = rapidities(coupling, dissipation)?;
    Ok(-2.0 * (bp * n_plus as f64 + bm * n_minus as f64))
}

/// Rapidities and `Z` at `(Λ, γ, T)`.
pub fn z_matrix(coupling: f64, dissipation: f64, temperature: f64) -> Result<ThirdQuantResult> {
    check_gamma(dissipation)?;
    let hp = HpParams::new(coupling, temperature)?;
    let (beta_plus, beta_minus) = rapidities_of(&hp, dissipation);
    let g = hp.mz() * dissipation;
    let (t, w) = (temperature, hp.omega_b);
    let denom = 32.0 * t * w;
    let z11 = c64(g, 0.0) * c64(g, -2.0 * w) / denom;
    let z12 = (g * g + 2.0 * (4.0 * t - w).powi(2)) / denom;
    Ok(ThirdQuantResult { beta_plus, beta_minus, z11, z12 })
}

/// `⟨o₁ o₂ ⋯ o_k⟩` in the zero-mean Gaussian stationary state, by summing
/// over all pairings. Odd orders vanish.
pub fn gaussian_moments(result: &ThirdQuantResult, monomial: &[Ladder]) -> C64 {
    if monomial.len() % 2 == 1 {
        return c64(0.0, 0.0);
    }
    let mut used = vec![false; monomial.len()];
    wick(result, monomial, &mut used)
}

fn wick(result: &ThirdQuantResult, ops: &[Ladder], used: &mut [bool]) -> C64 {
    let Some(first) = used.iter().position(|u| !u) else {
        return c64(1.0, 0.0);
    };
    used[first] = true;
    let mut total = c64(0.0, 0.0);
    for j in first + 1..ops.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        total += result.pair(ops[first], ops[j]) * wick(result, ops, used);
        used[j] = false;
    }
    used[first] = false;
    total
}
