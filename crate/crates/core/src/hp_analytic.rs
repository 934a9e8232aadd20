// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form large-`S` results from the Holstein-Primakoff bosonization.
//!
//! After the Bogoliubov rotation the model becomes a single damped mode:
//! `H_S = ω_b b†b + E₀`, `H_γ = (i m_z γ/4)(b†b† − bb)` and
//! `L = √γ (B₊b† + B₋b)`. Everything here follows from these three operators.
//! Time-dependent results are only available in the symmetric phase.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::linalg::{self, c64, C64};
use crate::lmg_model::DensityMatrix;
use crate::{Error, Result};

/// Default Fock cutoff for analytic boson states.
pub const DEFAULT_FOCK_CUTOFF: usize = 64;
/// Largest admissible neglected population above the Fock cutoff.
pub const TAIL_MASS_GUARD: f64 = 1e-10;

/// `θ₀` and `m = (sin θ₀, 0, cos θ₀)`; the positive branch `θ₀ = arccos(1/Λ)`
/// is used in the broken phase.
pub fn semiclassical_magnetization(coupling: f64) -> Result<(f64, [f64; 3])> {
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling Λ must be ≥ 0, got {coupling}")));
    }
    let theta0 = if coupling < 1.0 { 0.0 } else { (1.0 / coupling).acos() };
    Ok((theta0, [theta0.sin(), 0.0, theta0.cos()]))
}

/// Derived scalars of the bosonized model at fixed `(Λ, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HpParams {
    pub coupling: f64,
    pub temperature: f64,
    pub theta0: f64,
    pub m: [f64; 3],
    pub omega_a: f64,
    pub gamma_a: f64,
    /// `ε = −2Γ_a/ω_a`.
    pub epsilon: f64,
    /// Bogoliubov angle, `tanh φ_b = ε`.
    pub phi_b: f64,
    pub omega_b: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

impl HpParams {
    pub fn new(coupling: f64, temperature: f64) -> Result<Self> {
        let (theta0, m) = semiclassical_magnetization(coupling)?;
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature T must be > 0, got {temperature}")));
        }
        if coupling == 1.0 {
            return Err(Error::CriticalPoint);
        }
        let mz = m[2];
        let omega_a = mz + coupling - 1.5 * mz * mz * coupling;
        let gamma_a = -mz * mz * coupling / 4.0;
        let epsilon = -2.0 * gamma_a / omega_a;
        let phi_b = epsilon.atanh();
        let omega_b = if coupling < 1.0 { (1.0 - coupling).sqrt() } else { (coupling * coupling - 1.0).sqrt() };
        let r = (temperature / omega_b).sqrt();
        let q = 0.25 * (omega_b / temperature).sqrt();
        let b_plus = mz.sqrt() * (r - q);
        let b_minus = mz.sqrt() * (r + q);
        Ok(Self {
            coupling,
            temperature,
            theta0,
            m,
            omega_a,
            gamma_a,
            epsilon,
            phi_b,
            omega_b,
            b_plus,
            b_minus,
        })
    }

    pub fn mx(&self) -> f64 {
        self.m[0]
    }

    pub fn mz(&self) -> f64 {
        self.m[2]
    }

    pub fn is_symmetric(&self) -> bool {
        self.coupling < 1.0
    }

    /// `δ₀ = −S(m_z + Λm_x²/2) − Λm_z²/4`.
    pub fn delta0(&self, s: f64) -> f64 {
        let (mx, mz) = (self.mx(), self.mz());
        -s * (mz + self.coupling * mx * mx / 2.0) - self.coupling * mz * mz / 4.0
    }

    /// `E₀ = δ₀ + (ω_b − ω_a)/2`, the bosonized ground energy.
    pub fn ground_energy(&self, s: f64) -> f64 {
        self.delta0(s) + (self.omega_b - self.omega_a) / 2.0
    }

    /// `B±` assembled directly from `φ_b`, before simplification.
    pub fn b_from_bogoliubov(&self) -> (f64, f64) {
        let t = self.temperature;
        let mz = self.mz();
        let (sh, ch) = ((self.phi_b / 2.0).sinh(), (self.phi_b / 2.0).cosh());
        let pre = 1.0 / (4.0 * t.sqrt());
        let plus = pre * ((4.0 * mz * t + 1.0) * sh + (4.0 * mz * t - 1.0) * ch);
        let minus = pre * ((4.0 * mz * t - 1.0) * sh + (4.0 * mz * t + 1.0) * ch);
        (plus, minus)
    }

    /// `(B₊/B₋)²`, the Fock ratio of the stationary state.
    pub fn stationary_ratio(&self) -> f64 {
        (self.b_plus / self.b_minus).powi(2)
    }
}

pub fn hp_params(coupling: f64, temperature: f64) -> Result<HpParams> {
    HpParams::new(coupling, temperature)
}

/// `λ_{Δ,n}` with its labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticEigenvalue {
    pub delta: i64,
    pub n: u64,
    pub value: C64,
}

/// `λ_{Δ,n} = iω_bΔ − (m_zγ/2)(|Δ| + 2n)`. Independent of `T`.
pub fn liouvillian_eigenvalue(delta: i64, n: u64, coupling: f64, dissipation: f64) -> Result<C64> {
    // T only enters B±, which the eigenvalues do not use
    let hp = HpParams::new(coupling, 1.0)?;
    Ok(eigenvalue_from(&hp, delta, n, dissipation))
}

fn eigenvalue_from(hp: &HpParams, delta: i64, n: u64, dissipation: f64) -> C64 {
    let rate = hp.mz() * dissipation / 2.0 * (delta.unsigned_abs() + 2 * n) as f64;
    c64(-rate, hp.omega_b * delta as f64)
}

/// All `λ_{Δ,n}` with `|Δ| ≤ max_delta`, `n ≤ max_n`, by descending real part.
pub fn analytic_spectrum(
    coupling: f64,
    dissipation: f64,
    max_delta: u64,
    max_n: u64,
) -> Result<Vec<AnalyticEigenvalue>> {
    let hp = HpParams::new(coupling, 1.0)?;
    let md = max_delta as i64;
    let mut out: Vec<_> = (-md..=md)
        .flat_map(|delta| (0..=max_n).map(move |n| (delta, n)))
        .map(|(delta, n)| AnalyticEigenvalue { delta, n, value: eigenvalue_from(&hp, delta, n, dissipation) })
        .collect();
    out.sort_by(|a, b| {
        b.value.re.total_cmp(&a.value.re).then(a.value.im.abs().total_cmp(&b.value.im.abs()))
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryTemperature {
    /// `−ω_b / (2 ln(B₊/B₋))`.
    pub exact: f64,
    /// `T(1 − ω_b²/48T² − ω_b⁴/2880T⁴)`.
    pub series: f64,
}

pub fn stationary_temperature(coupling: f64, temperature: f64) -> Result<StationaryTemperature> {
    let hp = HpParams::new(coupling, temperature)?;
    stationary_temperature_of(&hp)
}

fn stationary_temperature_of(hp: &HpParams) -> Result<StationaryTemperature> {
    let (t, w) = (hp.temperature, hp.omega_b);
    if 4.0 * t <= w {
        return Err(Error::OutOfDomain(format!("stationary temperature needs 4T > ω_b (T = {t}, ω_b = {w})")));
    }
    let exact = -w / (2.0 * (hp.b_plus / hp.b_minus).ln());
    let r2 = (w / t).powi(2);
    let series = t * (1.0 - r2 / 48.0 - r2 * r2 / 2880.0);
    Ok(StationaryTemperature { exact, series })
}

/// Normalized geometric Fock state `∝ Σ xⁿ|n⟩⟨n|`, `n ≤ n_max`.
fn geometric_state(x: f64, n_max: usize) -> Result<DensityMatrix> {
    let tail = if x == 0.0 { 0.0 } else { x.powi(n_max as i32 + 1) };
    if tail > TAIL_MASS_GUARD {
        return Err(Error::CutoffTooSmall {
            n_max,
            reason: format!("neglected population {tail:.3e} exceeds {TAIL_MASS_GUARD:e}"),
        });
    }
    let mut w = Array1::from_shape_fn(n_max + 1, |n| x.powi(n as i32));
    let total = w.sum();
    w /= total;
    Ok(DensityMatrix::from_matrix_unchecked(Array2::from_diag(&w.mapv(|p| c64(p, 0.0)))))
}

/// Stationary state `∝ (B₊/B₋)^{2n}` in the `b`-boson Fock basis.
pub fn hp_stationary_state(coupling: f64, temperature: f64, n_max: usize) -> Result<DensityMatrix> {
    let hp = HpParams::new(coupling, temperature)?;
    if 4.0 * temperature <= hp.omega_b {
        return Err(Error::OutOfDomain(format!(
            "stationary state needs 4T > ω_b (T = {temperature}, ω_b = {})",
            hp.omega_b
        )));
    }
    geometric_state(hp.stationary_ratio(), n_max)
}

/// Initial-misalignment quench in the symmetric phase, the setting of all
/// time-dependent closed forms below.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quench {
    pub coupling: f64,
    pub temperature: f64,
    pub dissipation: f64,
    /// Rotation angle of the initial state away from `z`.
    pub theta: f64,
    /// Spin quantum number `S` (finite-size corrections).
    pub spin: f64,
}

impl Quench {
    pub fn hp(&self) -> Result<HpParams> {
        if !(self.dissipation >= 0.0) || !(self.spin > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quench needs γ ≥ 0, S > 0 and finite θ (γ = {}, S = {}, θ = {})",
                self.dissipation, self.spin, self.theta
            )));
        }
        let hp = HpParams::new(self.coupling, self.temperature)?;
        if !hp.is_symmetric() {
            return Err(Error::UnsupportedRegime(format!(
                "closed-form dynamics are derived for the symmetric phase only (Λ = {} ≥ 1)",
                self.coupling
            )));
        }
        Ok(hp)
    }
}

/// Which numerator to use in the disentangling coefficient `A₊(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum APlusNumerator {
    /// `B₊²`: stationary limit `(B₊/B₋)²`.
    Squared,
    /// `B₊`, an unsquared variant with the wrong stationary limit; kept for
    /// comparison.
    Printed,
}

/// `A₊(t) = N / (B₋² + m_z/(e^{m_zγt} − 1))` with `N = B₊²` or `B₊`.
pub fn a_plus(hp: &HpParams, dissipation: f64, t: f64, numerator: APlusNumerator) -> f64 {
    let mz = hp.mz();
    let num = match numerator {
        APlusNumerator::Squared => hp.b_plus * hp.b_plus,
        APlusNumerator::Printed => hp.b_plus,
    };
    let growth = (mz * dissipation * t).exp_m1();
    if growth == 0.0 {
        return 0.0;
    }
    if growth.is_infinite() {
        return num / (hp.b_minus * hp.b_minus);
    }
    num * growth / (hp.b_minus * hp.b_minus * growth + mz)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Su11Factors {
    /// `tanh ψ = 2B₊B₋/(B₊² + B₋²)`.
    pub psi: f64,
    pub a_plus: f64,
    /// `A₀ = e^{−m_zγt/2}(1 − A₊)`.
    pub a_zero: f64,
    /// `θ′ = θ√(S/2) e^{−φ_b/2}`.
    pub theta_prime: f64,
    /// `θ″ = θ′ e^{−m_zγt/2}`.
    pub theta_double_prime: f64,
}

pub fn su11_factors(quench: &Quench, t: f64) -> Result<Su11Factors> {
    let hp = quench.hp()?;
    let (bp, bm) = (hp.b_plus, hp.b_minus);
    let psi = (2.0 * bp * bm / (bp * bp + bm * bm)).atanh();
    let ap = a_plus(&hp, quench.dissipation, t, APlusNumerator::Squared);
    let decay = (-hp.mz() * quench.dissipation * t / 2.0).exp();
    let theta_prime = theta_prime(&hp, quench);
    Ok(Su11Factors {
        psi,
        a_plus: ap,
        a_zero: decay * (1.0 - ap),
        theta_prime,
        theta_double_prime: theta_prime * decay,
    })
}

fn theta_prime(hp: &HpParams, quench: &Quench) -> f64 {
    quench.theta * (quench.spin / 2.0).sqrt() * (-hp.phi_b / 2.0).exp()
}

/// `T_S(t)` from `e^{−ω_b/T_S} = A₊(t)`:
/// `1/T_S = (1/ω_b) ln((e^{ω_b/T_ss} − e^{−γt}) / (1 − e^{−γt}))`.
/// `T_S(0) = 0`.
pub fn time_dependent_temperature(quench: &Quench, t: f64) -> Result<f64> {
    let hp = quench.hp()?;
    time_dependent_temperature_of(&hp, quench.dissipation, t)
}

fn time_dependent_temperature_of(hp: &HpParams, dissipation: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be ≥ 0, got {t}")));
    }
    let tss = stationary_temperature_of(hp)?.exact;
    let decay = (-dissipation * t).exp();
    if decay == 1.0 {
        return Ok(0.0);
    }
    let inv = ((hp.omega_b / tss).exp() - decay) / (1.0 - decay);
    Ok(hp.omega_b / inv.ln())
}

/// `T_S(t)` with `e^{−ω_b/T_ss}` in place of `e^{+ω_b/T_ss}`. This sign
/// variant has the wrong stationary limit; it is kept only so tests can show
/// that. Negative or NaN where the logarithm argument drops below one or zero.
pub fn time_dependent_temperature_printed(quench: &Quench, t: f64) -> Result<f64> {
    let hp = quench.hp()?;
    let tss = stationary_temperature_of(&hp)?.exact;
    let decay = (-quench.dissipation * t).exp();
    let arg = ((-hp.omega_b / tss).exp() - decay) / (1.0 - decay);
    Ok(hp.omega_b / arg.ln())
}

/// `1/(e^{ω/T} − 1)`, zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// `ρ(t) = D(α) ρ_th(T_S(t)) D(α)†` with `α = θ′e^{−γt/2 − iω_b t}`, in the
/// truncated `b`-boson Fock basis.
pub fn evolved_state_hp(quench: &Quench, t: f64, n_max: usize) -> Result<DensityMatrix> {
    let hp = quench.hp()?;
    let x = a_plus(&hp, quench.dissipation, t, APlusNumerator::Squared);
    let thermal = geometric_state(x, n_max)?;
    let alpha = coherent_amplitude(&hp, quench, t);
    if alpha == c64(0.0, 0.0) {
        return Ok(thermal);
    }
    let d = displacement(alpha, n_max)?;
    let rho = d.dot(thermal.matrix()).dot(&linalg::dagger(&d));
    let guard_from = n_max + 1 - (n_max + 1) / 8;
    let edge: f64 = (guard_from..=n_max).map(|n| rho[[n, n]].re).sum();
    if edge > TAIL_MASS_GUARD {
        return Err(Error::CutoffTooSmall {
            n_max,
            reason: format!("displaced state has population {edge:.3e} near the cutoff"),
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(linalg::hermitian_part(&rho)))
}

/// `⟨b⟩(t) = θ′ e^{−m_zγt/2 − iω_b t}`.
pub fn coherent_amplitude(hp: &HpParams, quench: &Quench, t: f64) -> C64 {
    let r = theta_prime(hp, quench) * (-hp.mz() * quench.dissipation * t / 2.0).exp();
    C64::from_polar(r, -hp.omega_b * t)
}

/// `D(α) = exp(αb† − α*b)` on the truncated Fock space.
fn displacement(alpha: C64, n_max: usize) -> Result<Array2<C64>> {
    let b = annihilation(n_max);
    let bd = linalg::dagger(&b);
    // αb† − α*b = −i·G with Hermitian G = i(αb† − α*b)
    let g = (bd * alpha - b * alpha.conj()) * linalg::I;
    linalg::unitary_exp(&g, 1.0)
}

/// Truncated annihilation operator on `n ≤ n_max`.
pub fn annihilation(n_max: usize) -> Array2<C64> {
    let mut b = Array2::zeros((n_max + 1, n_max + 1));
    for n in 1..=n_max {
        b[[n - 1, n]] = c64((n as f64).sqrt(), 0.0);
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyPrediction {
    /// `⟨H_S⟩/S` including the `1/S` thermal term.
    pub with_finite_size: f64,
    /// `S → ∞` form, `−(m_z + Λm_x²/2) + (θ²ω_b/2)e^{−γt−φ_b}`.
    pub without_finite_size: f64,
}

/// `⟨H_S⟩/S = E₀/S + (θ²ω_b/2)e^{−γt−φ_b} + ω_b/[S(e^{ω_b/T_S(t)} − 1)]`.
pub fn energy_expectation_hp(quench: &Quench, t: f64) -> Result<EnergyPrediction> {
    let hp = quench.hp()?;
    let s = quench.spin;
    let w = hp.omega_b;
    let kick = quench.theta.powi(2) * w / 2.0 * (-quench.dissipation * t - hp.phi_b).exp();
    let ts = time_dependent_temperature_of(&hp, quench.dissipation, t)?;
    let heat = w * bose_occupation(w, ts) / s;
    let classical = -(hp.mz() + hp.coupling * hp.mx().powi(2) / 2.0);
    Ok(EnergyPrediction {
        with_finite_size: hp.ground_energy(s) / s + kick + heat,
        without_finite_size: classical + kick,
    })
}

/// `(m_x, m_y, m_z)(t)` including the `1/S` correction in `m_z`.
pub fn magnetization_hp(quench: &Quench, t: f64) -> Result<[f64; 3]> {
    let hp = quench.hp()?;
    let (g, th, phi, w) = (quench.dissipation, quench.theta, hp.phi_b, hp.omega_b);
    let mx = th * (-g * t / 2.0).exp() * (w * t).cos();
    let my = -th * (-g * t / 2.0 - phi).exp() * (w * t).sin();
    let ts = time_dependent_temperature_of(&hp, g, t)?;
    let mz = 1.0 - th * th / 2.0 * (-g * t - phi).exp() * (phi.cosh() + (2.0 * w * t).cos() * phi.sinh())
        - ((phi / 2.0).sinh().powi(2) + phi.cosh() * bose_occupation(w, ts)) / quench.spin;
    Ok([mx, my, mz])
}
