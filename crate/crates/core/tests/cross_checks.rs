// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Agreement between independently built routes through the crate: spin
//! numerics against each other, and the truncated boson generator against the
//! closed forms.

use lmg_core::bosonic_oracle::{self, OracleModel};
use lmg_core::dynamics::{self, EvolveOptions, InitialKind, InitialStateSpec};
use lmg_core::hp_analytic::{self, Quench};
use lmg_core::lmg_model::{self, ModelParams};
use lmg_core::spectral::{self, DiagonalizeOptions};
use lmg_core::{spin_algebra, third_quantization};
use proptest::prelude::*;

fn lattice_deviation(coupling: f64, gamma: f64, temperature: f64, n_max: usize) -> f64 {
    let ev = bosonic_oracle::oracle_eigenvalues(coupling, gamma, temperature, n_max, OracleModel::Full).unwrap();
    let mut worst = 0.0_f64;
    for total in 0..=2_u64 {
        for n_plus in 0..=total {
            let target = third_quantization::eigenvalue_lattice(coupling, gamma, n_plus, total - n_plus).unwrap();
            let dist = ev.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(dist);
        }
    }
    worst
}

#[test]
fn oracle_spectrum_is_the_rapidity_lattice_in_both_phases() {
    for coupling in [0.3, 2.5] {
        for gamma in [0.05, 0.4] {
            let dev = lattice_deviation(coupling, gamma, 1.0, 30);
            assert!(dev < 1e-8, "Λ = {coupling}, γ = {gamma}: {dev:e}");
        }
    }
}

#[test]
fn oracle_stationary_moments_match_z_matrix() {
    for gamma in [0.1, 1.0] {
        let st = bosonic_oracle::oracle_stationary(0.3, gamma, 0.7, 40, OracleModel::Full).unwrap();
        let z = third_quantization::z_matrix(0.3, gamma, 0.7).unwrap();
        assert!((st.occupation - z.z12).abs() < 1e-8, "γ = {gamma}");
        assert!((st.pair - z.z11).norm() < 1e-8, "γ = {gamma}");
    }
}

#[test]
fn restricted_stationary_magnetization_carries_the_finite_size_term() {
    // weak damping: the stationary state is the thermal state of the b mode
    // at T_ss, whose 1/S depletion of m_z is the long-time limit of the
    // closed-form magnetization
    let (s, coupling, gamma, temperature) = (200.0, 0.3, 0.01, 1.0);
    let params = ModelParams::new(s, coupling, gamma, temperature).unwrap();
    let (superop, basis) = lmg_model::restricted_superoperator(&params, 30, None).unwrap();
    let local = spectral::stationary_state_solve(&superop, &basis.parity_superoperator(superop.layout())).unwrap();
    let rho = lmg_core::DensityMatrix::from_matrix_unchecked(basis.lift(local.matrix()));
    let sz = spin_algebra::spin_operators(params.spin).z;
    let numeric = rho.expectation(&sz).re / s;
    let quench = Quench { coupling, temperature, dissipation: gamma, theta: 0.0, spin: s };
    let analytic = hp_analytic::magnetization_hp(&quench, 1e4 / gamma).unwrap()[2];
    let depletion = 1.0 - analytic;
    assert!(depletion > 1e-3);
    assert!((numeric - analytic).abs() < 0.05 * depletion, "numeric {numeric}, analytic {analytic}");
}

#[test]
fn evolution_relaxes_to_the_spectral_stationary_state() {
    let params = ModelParams::new(2.0, 0.5, 1.0, 1.0).unwrap();
    let rho0 = dynamics::initial_state(&params, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: 0.5 })
        .unwrap();
    let (_, last) = dynamics::evolve_with_final(&params, &rho0, &[0.0, 80.0], EvolveOptions::default()).unwrap();
    let superop = lmg_model::lindblad_superoperator(&params, None).unwrap();
    let parity = lmg_model::parity_superoperator(params.spin);
    let stationary = spectral::stationary_state_solve(&superop, &parity).unwrap();
    let dist = last.trace_distance(&stationary).unwrap();
    assert!(dist < 1e-7, "{dist:e}");
}

#[test]
fn restricted_gap_scan_at_full_size_matches_full_spectrum() {
    let template = ModelParams::new(3.0, 0.5, 0.3, 2.0).unwrap();
    let d = template.dim();
    let rows = spectral::gap_scan(&template, &[0.5, 1.8], d, None).unwrap();
    for row in rows {
        let params = template.with_coupling(row.coupling);
        let superop = lmg_model::lindblad_superoperator(&params, None).unwrap();
        let parity = lmg_model::parity_superoperator(params.spin);
        let full = spectral::diagonalize(&superop, &parity, DiagonalizeOptions::eigenvalues_only()).unwrap();
        let (plus_1, minus_0) = spectral::leading_modes(&full).unwrap();
        assert!((plus_1 - row.lambda_plus_1).norm() < 1e-9, "Λ = {}", row.coupling);
        assert!((minus_0 - row.lambda_minus_0).norm() < 1e-9, "Λ = {}", row.coupling);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assembled_superoperators_preserve_trace(
        twice_s in 1_u32..8,
        coupling in 0.0..3.0_f64,
        gamma in 0.0..1.0_f64,
        temperature in 0.1..8.0_f64,
    ) {
        let params = ModelParams::new(f64::from(twice_s) / 2.0, coupling, gamma, temperature).unwrap();
        let full = lmg_model::lindblad_superoperator(&params, None).unwrap();
        prop_assert!(full.identity_left_residual() < 1e-10);
        let k = params.dim().min(4);
        let (restricted, _) = lmg_model::restricted_superoperator(&params, k, None).unwrap();
        prop_assert!(restricted.identity_left_residual() < 1e-10);
    }
}
