// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

use ndarray_linalg::error::LinalgError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "superoperator dimension {dim2} exceeds the budget of {budget}; \
         use restricted_superoperator for this system size"
    )]
    TooLarge { dim2: usize, budget: usize },

    #[error("coupling Λ = 1 is the critical point; bosonized quantities are singular there")]
    CriticalPoint,

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("eigenvector {index} mixes parity sectors (|⟨Ad_P⟩| = {overlap:.3})")]
    MixedSector { index: usize, overlap: f64 },

    #[error("no unique stationary eigenvalue: {count} eigenvalues within {tol:e} of zero")]
    NoKernel { count: usize, tol: f64 },

    #[error("state is not positive: minimum eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("operator is not traceless: |Tr| = {0:e}")]
    NotTraceless(f64),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("trace drift {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("fit did not converge after {iterations} iterations (residual {residual:e})")]
    FitNonConvergence { iterations: usize, residual: f64 },

    #[error("Fock cutoff n_max = {n_max} is too small: {reason}")]
    CutoffTooSmall { n_max: usize, reason: String },

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
