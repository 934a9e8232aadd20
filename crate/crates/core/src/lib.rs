// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dissipative Lipkin-Meshkov-Glick model, treated twice.
//!
//! The exact route builds the finite-`S` spin Lindbladian
//! `∂ₜρ = i[ρ, H_S + H_γ] + LρL† − ½{L†L, ρ}` and either diagonalizes its
//! vectorized form ([`lmg_model`], [`spectral`]) or integrates it in time
//! ([`dynamics`]). The analytic route bosonizes the spin around its
//! semiclassical ground state and gives closed forms for the spectrum,
//! stationary state and relaxation dynamics ([`hp_analytic`],
//! [`third_quantization`]). [`bosonic_oracle`] is a brute-force truncated
//! Fock-space implementation of the bosonized generator used to check the
//! closed forms.
//!
//! Conventions fixed crate-wide:
//!
//! * `S_z` basis ordered `m = S, S−1, …, −S`; index 0 is `|S,S⟩`.
//! * Vectorization is row-major: `ρ_ij ↦ i·d + j`, so that
//!   `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.
//! * `h = 1`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bosonic_oracle;
pub mod dynamics;
pub mod error;
pub mod hp_analytic;
pub mod linalg;
pub mod lmg_model;
pub mod spectral;
pub mod spin_algebra;
pub mod third_quantization;

/// Crate version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use linalg::C64;
pub use lmg_model::{DensityMatrix, ModelParams, SuperOperatorMatrix, VecLayout};
pub use spin_algebra::{OperatorMatrix, Spin};
