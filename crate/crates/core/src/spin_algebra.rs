// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-`S` matrices in the `S_z` eigenbasis.
//!
//! Index `k = 0, …, 2S` labels `|S, m⟩` with `m = S − k`. Every other module
//! relies on this ordering.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c64, C64};
use crate::{Error, Result};

/// Dense complex square matrix acting on a Hilbert space (spin or truncated
/// boson).
pub type OperatorMatrix = Array2<C64>;

/// Spin quantum number `S`, stored as the integer `2S ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !s.is_finite() || s < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "spin quantum number must be a positive half-integer, got {s}"
            )));
        }
        Ok(Self { twice: twice.round() as u32 })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidParameter("spin S = 0 has no dynamics".into()));
        }
        Ok(Self { twice })
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// Hilbert-space dimension `2S + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(self, k: usize) -> f64 {
        self.value() - k as f64
    }

    /// `⟨m+1|S₊|m⟩` for `m = m(k)`, i.e. the matrix element coupling index
    /// `k` to `k − 1`. Defined for `1 ≤ k ≤ 2S`.
    pub fn ladder(self, k: usize) -> f64 {
        let s = self.value();
        let m = self.m(k);
        (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// Relative parity of basis index `k`, the eigenvalue of
    /// `exp(iπ(S − S_z))`: `+1` for even `k`.
    pub fn index_parity(k: usize) -> i8 {
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let mut x = Array2::zeros((d, d));
    let mut y = Array2::zeros((d, d));
    let mut z = Array2::zeros((d, d));
    for k in 0..d {
        z[[k, k]] = c64(spin.m(k), 0.0);
    }
    for k in 1..d {
        let half = 0.5 * spin.ladder(k);
        x[[k - 1, k]] = c64(half, 0.0);
        x[[k, k - 1]] = c64(half, 0.0);
        // S_y = (S₊ − S₋)/(2i)
        y[[k - 1, k]] = c64(0.0, -half);
        y[[k, k - 1]] = c64(0.0, half);
    }
    SpinOperators { x, y, z }
}

/// `S_x² + S_y² + S_z²`; equals `S(S+1)·𝟙`.
pub fn casimir(spin: Spin) -> OperatorMatrix {
    let ops = spin_operators(spin);
    ops.x.dot(&ops.x) + ops.y.dot(&ops.y) + ops.z.dot(&ops.z)
}

/// Diagonal of `P = exp(iπS_z)`.
pub fn parity_phases(spin: Spin) -> Array1<C64> {
    Array1::from_shape_fn(spin.dim(), |k| {
        C64::from_polar(1.0, std::f64::consts::PI * spin.m(k))
    })
}

/// `P = exp(iπS_z)`.
pub fn parity_operator(spin: Spin) -> OperatorMatrix {
    let phases = parity_phases(spin);
    let mut p = Array2::from_diag(&phases);
    // exp(iπm) for integer m should be exactly ±1; clean the sin(π·m) residue.
    for k in 0..spin.dim() {
        let z = &mut p[[k, k]];
        if z.im.abs() < 1e-12 {
            z.im = 0.0;
        }
        if z.re.abs() < 1e-12 {
            z.re = 0.0;
        }
    }
    p
}

/// `R_y(θ) = exp(−iθS_y)`, from the eigendecomposition of `S_y`.
pub fn rotation_y(spin: Spin, theta: f64) -> Result<OperatorMatrix> {
    let sy = spin_operators(spin).y;
    linalg::unitary_exp(&sy, theta)
}

/// Real symmetric `S_x²` (banded, bandwidth 2).
pub(crate) fn sx_squared_real(spin: Spin) -> Array2<f64> {
    let d = spin.dim();
    let (diag, off2) = sx_squared_bands(spin);
    let mut out = Array2::zeros((d, d));
    for k in 0..d {
        out[[k, k]] = diag[k];
        if k + 2 < d {
            out[[k, k + 2]] = off2[k];
            out[[k + 2, k]] = off2[k];
        }
    }
    out
}

/// Nonzero bands of `S_x²`: the diagonal and `⟨k|S_x²|k+2⟩` (length `d − 2`).
pub(crate) fn sx_squared_bands(spin: Spin) -> (Vec<f64>, Vec<f64>) {
    let d = spin.dim();
    let c = |k: usize| if k >= 1 && k < d { 0.5 * spin.ladder(k) } else { 0.0 };
    let diag = (0..d).map(|k| c(k).powi(2) + c(k + 1).powi(2)).collect();
    let off2 = (0..d.saturating_sub(2)).map(|k| c(k + 1) * c(k + 2)).collect();
    (diag, off2)
}

/// Projects the spin components onto the column span of real `v` (`d × K`):
/// returns `(VᵀS_xV, VᵀAV, VᵀS_zV)` where `S_y = −iA` and `A` is the real
/// antisymmetric part of `S_y`. Uses the tridiagonal structure directly, so
/// this stays cheap for large `S`.
pub(crate) fn project_components(
    spin: Spin,
    v: ArrayView2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let d = spin.dim();
    assert_eq!(v.nrows(), d);
    let kdim = v.ncols();
    let mut sx_v = Array2::<f64>::zeros((d, kdim));
    let mut a_v = Array2::<f64>::zeros((d, kdim));
    let mut sz_v = Array2::<f64>::zeros((d, kdim));
    for k in 0..d {
        let mut row_x = sx_v.row_mut(k);
        if k >= 1 {
            row_x.scaled_add(0.5 * spin.ladder(k), &v.row(k - 1));
        }
        if k + 1 < d {
            row_x.scaled_add(0.5 * spin.ladder(k + 1), &v.row(k + 1));
        }
        // A_{k−1,k} = c_k/2, A_{k,k−1} = −c_k/2
        let mut row_a = a_v.row_mut(k);
        if k >= 1 {
            row_a.scaled_add(-0.5 * spin.ladder(k), &v.row(k - 1));
        }
        if k + 1 < d {
            row_a.scaled_add(0.5 * spin.ladder(k + 1), &v.row(k + 1));
        }
        sz_v.row_mut(k).scaled_add(spin.m(k), &v.row(k));
    }
    let vt = v.t();
    (vt.dot(&sx_v), vt.dot(&a_v), vt.dot(&sz_v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, dagger, identity, max_abs};
    use proptest::prelude::*;

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = spin_operators(Spin::new(0.5).unwrap());
        let half = c64(0.5, 0.0);
        assert_eq!(ops.x[[0, 1]], half);
        assert_eq!(ops.x[[1, 0]], half);
        assert_eq!(ops.x[[0, 0]], c64(0.0, 0.0));
        assert_eq!(ops.y[[0, 1]], c64(0.0, -0.5));
        assert_eq!(ops.z[[0, 0]], half);
        assert_eq!(ops.z[[1, 1]], -half);
    }

    #[test]
    fn rejects_invalid_spin() {
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(f64::NAN).is_err());
        assert!(Spin::new(1.5).is_ok());
    }

    #[test]
    fn s3000_dimension() {
        assert_eq!(Spin::new(150.0).unwrap().dim(), 301);
    }

    #[test]
    fn commutation_relations_for_many_spins() {
        for twice in [1u32, 2, 3, 7, 40, 400] {
            let spin = Spin::from_twice(twice).unwrap();
            let SpinOperators { x, y, z } = spin_operators(spin);
            let tol = 1e-12 * spin.value().max(1.0);
            assert!(max_abs(&(commutator(&x, &y) - &z * linalg::I)) < tol);
            assert!(max_abs(&(commutator(&y, &z) - &x * linalg::I)) < tol);
            assert!(max_abs(&(commutator(&z, &x) - &y * linalg::I)) < tol);
        }
    }

    #[test]
    fn casimir_values() {
        let c = casimir(Spin::new(0.5).unwrap());
        assert!(max_abs(&(c - identity(2) * 0.75)) < 1e-14);
        let c = casimir(Spin::new(1.0).unwrap());
        assert!(max_abs(&(c - identity(3) * 2.0)) < 1e-14);
        let c = casimir(Spin::new(60.0).unwrap());
        let expected = 60.0 * 61.0;
        assert!(max_abs(&(c - identity(121) * expected)) < 1e-9 * expected);
    }

    #[test]
    fn parity_spin_one() {
        let p = parity_operator(Spin::new(1.0).unwrap());
        assert_eq!(p.diag().to_vec(), vec![c64(-1.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0)]);
    }

    #[test]
    fn parity_flips_sx_and_keeps_sz() {
        for twice in [1u32, 2, 5, 8] {
            let spin = Spin::from_twice(twice).unwrap();
            let p = parity_operator(spin);
            let ops = spin_operators(spin);
            let pd = dagger(&p);
            assert!(max_abs(&(pd.dot(&ops.x).dot(&p) + &ops.x)) < 1e-12);
            assert!(max_abs(&(pd.dot(&ops.z).dot(&p) - &ops.z)) < 1e-12);
            assert!(max_abs(&(pd.dot(&p) - identity(spin.dim()))) < 1e-12);
            if spin.is_integer() {
                assert!(max_abs(&(p.dot(&p) - identity(spin.dim()))) < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_identity_and_flip() {
        let spin = Spin::new(2.0).unwrap();
        let r = rotation_y(spin, 0.0).unwrap();
        assert!(max_abs(&(r - identity(5))) < 1e-12);
        let r = rotation_y(spin, std::f64::consts::PI).unwrap();
        // |S,S⟩ → |S,−S⟩ up to a phase
        assert!((r[[4, 0]].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_sz_expectation() {
        // brute force at S = 2: ⟨S,S| R† S_z R |S,S⟩ = S cos θ
        let spin = Spin::new(2.0).unwrap();
        let sz = spin_operators(spin).z;
        for theta in [0.3, 1.1, 2.5] {
            let r = rotation_y(spin, theta).unwrap();
            let m = dagger(&r).dot(&sz).dot(&r);
            assert!((m[[0, 0]].re - 2.0 * f64::cos(theta)).abs() < 1e-12);
            // odd in θ: the rotation tilts S_z towards +x
            let sx = spin_operators(spin).x;
            let mx = dagger(&r).dot(&sx).dot(&r);
            assert!((mx[[0, 0]].re - 2.0 * f64::sin(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_helpers_match_dense() {
        let spin = Spin::new(3.5).unwrap();
        let ops = spin_operators(spin);
        let sx2 = ops.x.dot(&ops.x);
        assert!(max_abs(&(linalg::real(&sx_squared_real(spin)) - sx2)) < 1e-12);

        let d = spin.dim();
        let v = Array2::from_shape_fn((d, 3), |(i, j)| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let (px, pa, pz) = project_components(spin, v.view());
        let vc = linalg::real(&v);
        let vt = dagger(&vc);
        assert!(max_abs(&(linalg::real(&px) - vt.dot(&ops.x).dot(&vc))) < 1e-10);
        assert!(max_abs(&(linalg::real(&pa) * c64(0.0, -1.0) - vt.dot(&ops.y).dot(&vc))) < 1e-10);
        assert!(max_abs(&(linalg::real(&pz) - vt.dot(&ops.z).dot(&vc))) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rotations_compose(twice in 1u32..12, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let spin = Spin::from_twice(twice).unwrap();
            let r1 = rotation_y(spin, t1).unwrap();
            let r2 = rotation_y(spin, t2).unwrap();
            let r12 = rotation_y(spin, t1 + t2).unwrap();
            prop_assert!(max_abs(&(r1.dot(&r2) - r12)) < 1e-10);
        }
    }
}
