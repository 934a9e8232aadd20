// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force truncated Fock-space version of the bosonized Lindbladian.
//!
//! In the row-major vectorization `|i⟩⟨j| ↦ |i⟩|j⟩`, left multiplication acts
//! on the first mode (`b₁ = b ⊗ 𝟙`) and right multiplication by an operator
//! `A` acts on the second as `Aᵀ`. The generator then reads `𝒰 + 𝒟` with
//!
//! * `𝒰 = iω_b(b₂†b₂ − b₁†b₁) + (m_zγ/4)(b₁†² + b₂†² − b₁² − b₂²)`,
//! * `𝒟 = L₁L₂ − ½(L†L ⊗ 𝟙 + 𝟙 ⊗ L†L)`, `L = √γ(B₊b† + B₋b)`,
//!
//! with every product taken between truncated matrices, so trace
//! preservation holds exactly at any cutoff.
//!
//! [`OracleModel::Secular`] drops the terms that do not conserve the boson
//! number: `𝓛ρ = −iω_b[b†b, ρ] + γB₋²D[b]ρ + γB₊²D[b†]ρ`. Its stationary
//! state is exactly geometric with ratio `(B₊/B₋)²`, and it is the model in
//! which the closed-form relaxation of the occupation holds exactly.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::dynamics::{self, IntegratorOptions};
use crate::hp_analytic::HpParams;
use crate::linalg::{self, c64, C64};
use crate::lmg_model::{DensityMatrix, LindbladGenerator, SuperOperatorMatrix, VecLayout};
use crate::spectral::{self, DiagonalizeOptions};
use crate::{Error, Result};

pub const MIN_CUTOFF: usize = 8;
pub const DEFAULT_CUTOFF: usize = 40;

/// Single-mode Fock space `n = 0..=n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < MIN_CUTOFF {
            return Err(Error::CutoffTooSmall { n_max, reason: format!("oracle needs n_max ≥ {MIN_CUTOFF}") });
        }
        Ok(Self { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    pub fn dim(self) -> usize {
        self.n_max + 1
    }

    /// Dimension of the vectorized two-mode space.
    pub fn vec_dim(self) -> usize {
        self.dim() * self.dim()
    }

    /// Truncated `b`.
    pub fn annihilation(self) -> Array2<f64> {
        let mut b = Array2::zeros((self.dim(), self.dim()));
        for n in 1..=self.n_max {
            b[[n - 1, n]] = (n as f64).sqrt();
        }
        b
    }

    pub fn number(self) -> Array2<f64> {
        Array2::from_diag(&Array1::from_shape_fn(self.dim(), |n| n as f64))
    }

    /// Two-mode `K₀ = ½(b₁†b₁ + b₂†b₂ + 1)`, `K₋ = b₁b₂`, `K₊ = b₁†b₂†` as
    /// dense matrices on the vectorized space.
    pub fn su11_generators(self) -> [Array2<C64>; 3] {
        let b = linalg::real(&self.annihilation());
        let bd = linalg::dagger(&b);
        let id = linalg::identity(self.dim());
        let n = bd.dot(&b);
        let k0 = (linalg::kron(&n, &id) + linalg::kron(&id, &n) + linalg::identity(self.vec_dim())) * c64(0.5, 0.0);
        let km = linalg::kron(&b, &b);
        let kp = linalg::kron(&bd, &bd);
        [k0, km, kp]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleModel {
    /// The full quadratic generator.
    #[default]
    Full,
    /// Number-conserving part only.
    Secular,
}

/// Which matrix units `|i⟩⟨j|` the vectorized space keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BosonSector {
    All,
    /// `i + j` even; the full generator conserves this parity and the
    /// stationary state lives here.
    EvenParity,
    /// `i = j`; closed only under the secular generator.
    Diagonal,
}

/// Boson model parameters derived from `(Λ, γ, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BosonParams {
    pub omega_b: f64,
    pub mz: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub dissipation: f64,
}

impl BosonParams {
    pub fn new(coupling: f64, dissipation: f64, temperature: f64) -> Result<Self> {
        if !(dissipation >= 0.0 && dissipation.is_finite()) {
            return Err(Error::InvalidParameter(format!("dissipation γ must be ≥ 0, got {dissipation}")));
        }
        let hp = HpParams::new(coupling, temperature)?;
        Ok(Self { omega_b: hp.omega_b, mz: hp.mz(), b_plus: hp.b_plus, b_minus: hp.b_minus, dissipation })
    }

    /// Single-mode operators: `(H, jump operators)` with
    /// `H = ω_b b†b + i(m_zγ/4)(b†² − b²)` for the full model.
    pub fn generator_parts(&self, basis: FockBasis, model: OracleModel) -> (Array2<C64>, Vec<Array2<C64>>) {
        let b = linalg::real(&basis.annihilation());
        let bd = linalg::dagger(&b);
        let n = linalg::real(&basis.number());
        let g = self.dissipation;
        match model {
            OracleModel::Full => {
                let sq = (bd.dot(&bd) - b.dot(&b)) * c64(0.0, self.mz * g / 4.0);
                let l = (&bd * self.b_plus + &b * self.b_minus) * c64(g.sqrt(), 0.0);
                (n * c64(self.omega_b, 0.0) + sq, vec![l])
            }
            OracleModel::Secular => (
                n * c64(self.omega_b, 0.0),
                vec![b * c64(g.sqrt() * self.b_minus, 0.0), bd * c64(g.sqrt() * self.b_plus, 0.0)],
            ),
        }
    }

    pub fn generator(&self, basis: FockBasis, model: OracleModel) -> Result<LindbladGenerator> {
        let (h, jumps) = self.generator_parts(basis, model);
        LindbladGenerator::new(h, jumps)
    }
}

/// Nonzero entries of a matrix, row by row.
fn row_entries(a: &Array2<C64>) -> Vec<Vec<(usize, C64)>> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().enumerate().filter(|(_, z)| **z != c64(0.0, 0.0)).map(|(k, &z)| (k, z)).collect())
        .collect()
}

fn sector_layout(basis: FockBasis, sector: BosonSector) -> Result<VecLayout> {
    let d = basis.dim();
    match sector {
        BosonSector::All => Ok(VecLayout::full(d)),
        BosonSector::EvenParity => {
            let units = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|(i, j)| (i + j) % 2 == 0).collect();
            VecLayout::from_units(d, units)
        }
        BosonSector::Diagonal => VecLayout::from_units(d, (0..d).map(|i| (i, i)).collect()),
    }
}

/// The two-mode superoperator `𝒰 + 𝒟` on the chosen sector. Entries
/// coupling to units outside the sector are dropped, which is exact for
/// [`BosonSector::EvenParity`] and, in the secular model, for
/// [`BosonSector::Diagonal`].
pub fn bosonic_superoperator_sector(
    params: &BosonParams,
    basis: FockBasis,
    model: OracleModel,
    sector: BosonSector,
) -> Result<SuperOperatorMatrix> {
    if sector == BosonSector::Diagonal && model == OracleModel::Full {
        return Err(Error::InvalidParameter("the full generator couples diagonal to off-diagonal units".into()));
    }
    let layout = sector_layout(basis, sector)?;
    let (h, jumps) = params.generator_parts(basis, model);
    let d = basis.dim();
    let mut ltl = Array2::<C64>::zeros((d, d));
    for l in &jumps {
        ltl = ltl + linalg::dagger(l).dot(l);
    }
    // 𝒰 + 𝒟 = X ⊗ 𝟙 + 𝟙 ⊗ Y + Σ L ⊗ L̄ with X = −iH − ½L†L, Y = X̄.
    let x = &h * c64(0.0, -1.0) - &ltl * c64(0.5, 0.0);
    let y = x.mapv(|z| z.conj());
    let (xr, yr) = (row_entries(&x), row_entries(&y));
    let lr: Vec<_> = jumps.iter().map(|l| (row_entries(l), row_entries(&l.mapv(|z| z.conj())))).collect();
    let n = layout.len();
    let mut m = Array2::<C64>::zeros((n, n));
    for p in 0..n {
        let (i, j) = layout.unit(p);
        for &(k, v) in &xr[i] {
            if let Some(q) = layout.position(k, j) {
                m[[p, q]] += v;
            }
        }
        for &(l, v) in &yr[j] {
            if let Some(q) = layout.position(i, l) {
                m[[p, q]] += v;
            }
        }
        for (left, right) in &lr {
            for &(k, u) in &left[i] {
                for &(l, v) in &right[j] {
                    if let Some(q) = layout.position(k, l) {
                        m[[p, q]] += u * v;
                    }
                }
            }
        }
    }
    SuperOperatorMatrix::dense(layout, m)
}

/// The full two-mode superoperator, `(n_max+1)²` square.
pub fn bosonic_superoperator(
    coupling: f64,
    dissipation: f64,
    temperature: f64,
    n_max: usize,
    model: OracleModel,
) -> Result<SuperOperatorMatrix> {
    let params = BosonParams::new(coupling, dissipation, temperature)?;
    bosonic_superoperator_sector(&params, FockBasis::new(n_max)?, model, BosonSector::All)
}

/// `Ad_P` for boson parity `P = (−1)^{b†b}`: `(−1)^{i+j}` on `|i⟩⟨j|`.
pub fn boson_parity_superoperator(layout: &VecLayout) -> SuperOperatorMatrix {
    let diag = Array1::from_shape_fn(layout.len(), |p| {
        let (i, j) = layout.unit(p);
        c64(if (i + j) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    SuperOperatorMatrix::diagonal(layout.clone(), diag).expect("layout-sized diagonal")
}

/// All eigenvalues of the truncated generator, in spectral order.
pub fn oracle_eigenvalues(
    coupling: f64,
    dissipation: f64,
    temperature: f64,
    n_max: usize,
    model: OracleModel,
) -> Result<Vec<C64>> {
    let l = bosonic_superoperator(coupling, dissipation, temperature, n_max, model)?;
    let parity = boson_parity_superoperator(l.layout());
    Ok(spectral::diagonalize(&l, &parity, DiagonalizeOptions::eigenvalues_only())?.eigenvalues)
}

/// Eigenvalues whose eigen-operators plausibly live away from the cutoff:
/// `|Im λ| ≤ (n_max − n_max/4)·ω_b` and `|Re λ|` below the same number of
/// damping quanta. Comparisons use only these.
pub fn away_from_edge(eigenvalues: &[C64], params: &BosonParams, n_max: usize) -> Vec<C64> {
    let keep = (n_max - n_max / 4) as f64;
    let rate = (params.mz * params.dissipation).max(f64::MIN_POSITIVE);
    eigenvalues
        .iter()
        .copied()
        .filter(|z| z.im.abs() <= keep * params.omega_b && z.re.abs() <= keep * rate)
        .collect()
}

#[derive(Clone, Debug)]
pub struct OracleStationary {
    pub rho: DensityMatrix,
    /// `⟨b†b⟩`.
    pub occupation: f64,
    /// `⟨bb⟩`.
    pub pair: C64,
}

/// Stationary state from a kernel solve in the parity-even sector (or the
/// diagonal one for the secular model).
pub fn oracle_stationary(
    coupling: f64,
    dissipation: f64,
    temperature: f64,
    n_max: usize,
    model: OracleModel,
) -> Result<OracleStationary> {
    let params = BosonParams::new(coupling, dissipation, temperature)?;
    if dissipation == 0.0 {
        return Err(Error::NoKernel { count: 0, tol: spectral::ZERO_TOL });
    }
    let basis = FockBasis::new(n_max)?;
    let sector = match model {
        OracleModel::Full => BosonSector::EvenParity,
        OracleModel::Secular => BosonSector::Diagonal,
    };
    let l = bosonic_superoperator_sector(&params, basis, model, sector)?;
    let parity = boson_parity_superoperator(l.layout());
    let rho = spectral::stationary_state_solve(&l, &parity)?;
    let b = linalg::real(&basis.annihilation());
    let n = linalg::real(&basis.number());
    Ok(OracleStationary { occupation: rho.expectation(&n).re, pair: rho.expectation(&b.dot(&b)), rho })
}

/// Boson moments along a trajectory.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    /// `⟨b†b⟩`.
    pub occupation: Vec<f64>,
    /// `⟨b⟩`.
    pub mean: Vec<C64>,
    /// `ω_b / ln(1 + 1/n_th)` with `n_th = ⟨b†b⟩ − |⟨b⟩|²`, the occupation of
    /// the state displaced back to zero mean. Zero when `n_th = 0`.
    pub temperature: Vec<f64>,
}

/// Initial coherent amplitude `θ′ = θ√(S/2)e^{−φ_b/2}`.
pub fn initial_amplitude(coupling: f64, theta: f64, spin: f64) -> Result<f64> {
    let hp = HpParams::new(coupling, 1.0)?;
    Ok(theta * (spin / 2.0).sqrt() * (-hp.phi_b / 2.0).exp())
}

/// Coherent state `|α⟩` on the truncated space, renormalized.
fn coherent_state(alpha: f64, basis: FockBasis) -> Array1<C64> {
    let mut v = Array1::zeros(basis.dim());
    let mut c = (-alpha * alpha / 2.0).exp();
    v[0] = c64(c, 0.0);
    for n in 1..basis.dim() {
        c *= alpha / (n as f64).sqrt();
        v[n] = c64(c, 0.0);
    }
    let norm = v.iter().map(|z: &C64| z.norm_sqr()).sum::<f64>().sqrt();
    v / c64(norm, 0.0)
}

/// Integrates the truncated boson master equation from the coherent state
/// with amplitude `θ′` (symmetric phase only).
#[allow(clippy::too_many_arguments)]
pub fn oracle_evolution(
    coupling: f64,
    dissipation: f64,
    temperature: f64,
    theta: f64,
    spin: f64,
    grid: &[f64],
    n_max: usize,
    model: OracleModel,
) -> Result<OracleTrajectory> {
    let params = BosonParams::new(coupling, dissipation, temperature)?;
    if coupling >= 1.0 {
        return Err(Error::UnsupportedRegime("oracle evolution is defined for the symmetric phase".into()));
    }
    let basis = FockBasis::new(n_max)?;
    let alpha = initial_amplitude(coupling, theta, spin)?;
    let margin = 10.0 * (alpha.abs() + 1.0);
    if alpha * alpha + margin > n_max as f64 {
        return Err(Error::CutoffTooSmall {
            n_max,
            reason: format!("coherent amplitude {alpha:.3} needs n_max > {:.0}", alpha * alpha + margin),
        });
    }
    let generator = params.generator(basis, model)?;
    let rho0 = DensityMatrix::pure(&coherent_state(alpha, basis));
    let b = linalg::real(&basis.annihilation());
    let n = linalg::real(&basis.number());
    let mut out = OracleTrajectory::default();
    let opts = IntegratorOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
    dynamics::integrate(&generator, rho0.matrix(), grid, opts, |_, t, rho| {
        let occ = linalg::trace_product(rho, &n).re;
        let mean = linalg::trace_product(rho, &b);
        let thermal = occ - mean.norm_sqr();
        out.times.push(t);
        out.occupation.push(occ);
        out.mean.push(mean);
        out.temperature.push(if thermal > 0.0 { params.omega_b / (1.0 / thermal).ln_1p() } else { 0.0 });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmg_model::assemble_superoperator;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cutoff_guard() {
        assert!(matches!(FockBasis::new(7), Err(Error::CutoffTooSmall { .. })));
        let b = FockBasis::new(8).unwrap();
        assert_eq!(b.vec_dim(), 81);
        assert!(bosonic_superoperator(1.0, 0.1, 4.0, 10, OracleModel::Full).is_err());
    }

    #[test]
    fn su11_algebra() {
        // [K₀, K±] = ±K± and [K₋, K₊] = 2K₀ away from the cutoff
        let basis = FockBasis::new(8).unwrap();
        let [k0, km, kp] = basis.su11_generators();
        let d = basis.dim();
        let low = |m: &Array2<C64>| {
            let mut worst = 0.0_f64;
            for p in 0..m.nrows() {
                for q in 0..m.ncols() {
                    let (i, j, k, l) = (p / d, p % d, q / d, q % d);
                    if i < d - 1 && j < d - 1 && k < d - 1 && l < d - 1 {
                        worst = worst.max(m[[p, q]].norm());
                    }
                }
            }
            worst
        };
        assert!(low(&(linalg::commutator(&k0, &kp) - &kp)) < 1e-12);
        assert!(low(&(linalg::commutator(&k0, &km) + &km)) < 1e-12);
        assert!(low(&(linalg::commutator(&km, &kp) - &k0 * c64(2.0, 0.0))) < 1e-12);
    }

    #[test]
    fn matches_generic_assembly_and_preserves_trace() {
        let params = BosonParams::new(0.4, 0.2, 3.0).unwrap();
        let basis = FockBasis::new(9).unwrap();
        for model in [OracleModel::Full, OracleModel::Secular] {
            let direct = bosonic_superoperator_sector(&params, basis, model, BosonSector::All).unwrap();
            let generic = assemble_superoperator(&params.generator(basis, model).unwrap(), VecLayout::full(10)).unwrap();
            assert!(linalg::max_abs(&(direct.matrix().into_owned() - generic.matrix().into_owned())) < 1e-13);
            assert!(direct.identity_left_residual() < 1e-12);
        }
    }

    #[test]
    fn unitary_spectrum() {
        let w = HpParams::new(0.5, 4.0).unwrap().omega_b;
        let ev = oracle_eigenvalues(0.5, 0.0, 4.0, 10, OracleModel::Full).unwrap();
        for z in &ev {
            assert!(z.re.abs() < 1e-10);
            let k = z.im / w;
            assert!((k - k.round()).abs() < 1e-10);
        }
        assert_eq!(ev.len(), 121);
    }

    #[test]
    fn strong_damping_matches_rapidities() {
        // Low T keeps the Fock tails short (x ≈ 0.23), so the cutoff is harmless;
        // at T = 4 the truncation error decays only like 0.84^n_max.
        // The overdamped case is squeezed harder, so only low modes are checked.
        let low: &[(u64, u64)] = &[(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)];
        let more: &[(u64, u64)] = &[(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (3, 0)];
        for (gamma, modes) in [(0.3, more), (2.0, low)] {
            let params = BosonParams::new(0.5, gamma, 0.5).unwrap();
            let ev = oracle_eigenvalues(0.5, gamma, 0.5, 30, OracleModel::Full).unwrap();
            let kept = away_from_edge(&ev, &params, 30);
            for &(np, nm) in modes {
                let lat = crate::third_quantization::eigenvalue_lattice(0.5, gamma, np, nm).unwrap();
                let best = kept.iter().map(|z| (z - lat).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-5, "γ = {gamma}, ({np}, {nm}): {best:e}");
            }
        }
    }

    #[test]
    fn secular_stationary_is_geometric() {
        let st = oracle_stationary(0.1, 0.3, 4.0, 200, OracleModel::Secular).unwrap();
        let hp = HpParams::new(0.1, 4.0).unwrap();
        let x = hp.stationary_ratio();
        let m = st.rho.matrix();
        for n in 0..20 {
            assert_abs_diff_eq!(m[[n + 1, n + 1]].re / m[[n, n]].re, x, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(st.occupation, x / (1.0 - x), epsilon = 1e-6);
    }

    #[test]
    fn parity_sector_solve_matches_full() {
        let params = BosonParams::new(0.3, 0.2, 2.0).unwrap();
        let basis = FockBasis::new(24).unwrap();
        let full = bosonic_superoperator_sector(&params, basis, OracleModel::Full, BosonSector::All).unwrap();
        let a = spectral::stationary_state_solve(&full, &boson_parity_superoperator(full.layout())).unwrap();
        let b = oracle_stationary(0.3, 0.2, 2.0, 24, OracleModel::Full).unwrap();
        assert!(a.trace_distance(&b.rho).unwrap() < 1e-12);
    }

    #[test]
    fn evolution_guards_and_fixed_point() {
        assert!(matches!(
            oracle_evolution(0.1, 0.3, 4.0, 1.0, 400.0, &[0.0, 1.0], 40, OracleModel::Full),
            Err(Error::CutoffTooSmall { .. })
        ));
        assert!(oracle_evolution(1.5, 0.3, 4.0, 0.0, 10.0, &[0.0, 1.0], 40, OracleModel::Full).is_err());
        let late = oracle_evolution(0.1, 0.6, 1.0, 0.0, 100.0, &[0.0, 60.0], 40, OracleModel::Full).unwrap();
        let st = oracle_stationary(0.1, 0.6, 1.0, 40, OracleModel::Full).unwrap();
        assert_abs_diff_eq!(late.occupation[1], st.occupation, epsilon = 1e-6);
        assert_eq!(late.temperature[0], 0.0);
    }
}
