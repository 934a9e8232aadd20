// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Model operators and the Lindbladian
//!
//! ```text
//! 𝓛ρ = i[ρ, H_S + H_γ] + LρL† − ½{L†L, ρ}
//! H_S = −(Λ/2S) S_x² − S_z
//! H_γ = (γ/4S) {S_x, S_y}
//! L   = √(2γT/S) (S_x + i/(4T) S_y)
//! ```
//!
//! Written with `G = −iH − ½L†L` the generator is `𝓛ρ = Gρ + ρG† + LρL†`,
//! which is what both the action and the superoperator assembly use. Under
//! row-major vectorization the superoperator is
//! `G ⊗ 𝟙 + 𝟙 ⊗ G* + L ⊗ L*`.

use std::borrow::Cow;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::hp_analytic::HpParams;
use crate::linalg::{self, c64, dagger, SparseRows, C64};
use crate::spin_algebra::{self, OperatorMatrix, Spin};
use crate::{Error, Result};

/// Largest `d²` for which the full superoperator is materialized by default.
pub const DEFAULT_SUPEROPERATOR_BUDGET: usize = 4096;

/// Default band window for [`restricted_superoperator`], in units of `ω_b`.
pub const DEFAULT_BAND_WINDOW: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "S")]
    pub spin: Spin,
    /// `Λ ≥ 0`.
    #[serde(rename = "lambda")]
    pub coupling: f64,
    /// `γ ≥ 0`.
    #[serde(rename = "gamma")]
    pub dissipation: f64,
    /// Bath temperature `T > 0`.
    #[serde(rename = "T")]
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(s: f64, coupling: f64, dissipation: f64, temperature: f64) -> Result<Self> {
        let p = Self { spin: Spin::new(s)?, coupling, dissipation, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling Λ must be ≥ 0, got {}", self.coupling)));
        }
        if !(self.dissipation >= 0.0 && self.dissipation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dissipation γ must be ≥ 0, got {}",
                self.dissipation
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature T must be > 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn s(&self) -> f64 {
        self.spin.value()
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }

    pub fn with_dissipation(self, dissipation: f64) -> Self {
        Self { dissipation, ..self }
    }
}

/// `H_S = −(Λ/2S) S_x² − S_z`.
pub fn hamiltonian_system(params: &ModelParams) -> OperatorMatrix {
    let sx2 = spin_algebra::sx_squared_real(params.spin);
    let sz = spin_algebra::spin_operators(params.spin).z;
    linalg::real(&sx2) * c64(-params.coupling / (2.0 * params.s()), 0.0) - sz
}

/// `H_γ = (γ/4S) {S_x, S_y}`.
pub fn hamiltonian_gamma(params: &ModelParams) -> OperatorMatrix {
    let ops = spin_algebra::spin_operators(params.spin);
    linalg::anticommutator(&ops.x, &ops.y) * c64(params.dissipation / (4.0 * params.s()), 0.0)
}

/// `L = √(2γT/S) (S_x + i/(4T) S_y)`.
pub fn jump_operator(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let ops = spin_algebra::spin_operators(params.spin);
    Ok(jump_from_components(params, &ops.x, &ops.y))
}

fn jump_from_components(params: &ModelParams, sx: &OperatorMatrix, sy: &OperatorMatrix) -> OperatorMatrix {
    let t = params.temperature;
    let pref = (2.0 * params.dissipation * t / params.s()).sqrt();
    (sx + &(sy * c64(0.0, 1.0 / (4.0 * t)))) * c64(pref, 0.0)
}

/// A Lindblad generator `𝓛ρ = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`
/// prepared for repeated application.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: OperatorMatrix,
    jumps: Vec<OperatorMatrix>,
    /// `G = −iH − ½ Σ L†L`.
    g: OperatorMatrix,
    g_sparse: SparseRows,
    jumps_sparse: Vec<SparseRows>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: OperatorMatrix, jumps: Vec<OperatorMatrix>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.ncols() });
        }
        for l in &jumps {
            if l.dim() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: l.nrows() });
            }
        }
        let mut g = &hamiltonian * c64(0.0, -1.0);
        for l in &jumps {
            g = g - dagger(l).dot(l) * c64(0.5, 0.0);
        }
        let g_sparse = SparseRows::from_dense(&g);
        let jumps_sparse = jumps.iter().map(SparseRows::from_dense).collect();
        Ok(Self { hamiltonian, jumps, g, g_sparse, jumps_sparse })
    }

    /// Generator of the spin model for `params`.
    pub fn spin_model(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let h = hamiltonian_system(params) + hamiltonian_gamma(params);
        Self::new(h, vec![jump_operator(params)?])
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[OperatorMatrix] {
        &self.jumps
    }

    /// `G = −iH − ½ Σ L†L`.
    pub fn effective(&self) -> &OperatorMatrix {
        &self.g
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        let d = self.dim();
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        let mut out = Array2::zeros((d, d));
        let mut work = ActionWorkspace::new(d);
        self.apply_into(rho, &mut out, &mut work);
        Ok(out)
    }

    /// `out = 𝓛ρ`; `ρ` need not be Hermitian.
    pub fn apply_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>, work: &mut ActionWorkspace) {
        let ActionWorkspace { rho_dag, a, b } = work;
        linalg::dagger_into(rho, rho_dag);
        // Gρ
        self.g_sparse.mul_into(rho.view(), out);
        // ρG† = (Gρ†)†
        self.g_sparse.mul_into(rho_dag.view(), a);
        add_dagger(out, a);
        for l in &self.jumps_sparse {
            // LρL† = L (Lρ†)†
            l.mul_into(rho_dag.view(), a);
            linalg::dagger_into(a, b);
            l.mul_into(b.view(), a);
            *out += &*a;
        }
    }

    /// `out = 𝓛ρ` for Hermitian `ρ`, using `ρG† = (Gρ)†`. About twice as
    /// fast as [`apply_into`](Self::apply_into); the result is wrong if `ρ`
    /// is not Hermitian.
    pub fn apply_hermitian_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>, work: &mut ActionWorkspace) {
        let ActionWorkspace { rho_dag: x, a, b } = work;
        self.g_sparse.mul_into(rho.view(), x);
        linalg::hermitian_sum_into(x, out);
        for l in &self.jumps_sparse {
            l.mul_adjoint_right_into(rho.view(), a);
            l.mul_into(a.view(), b);
            *out += &*b;
        }
    }
}

fn add_dagger(out: &mut Array2<C64>, x: &Array2<C64>) {
    let n = out.nrows();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] += x[[j, i]].conj();
        }
    }
}

/// Scratch buffers for [`LindbladGenerator::apply_into`].
#[derive(Clone, Debug)]
pub struct ActionWorkspace {
    rho_dag: Array2<C64>,
    a: Array2<C64>,
    b: Array2<C64>,
}

impl ActionWorkspace {
    pub fn new(d: usize) -> Self {
        Self { rho_dag: Array2::zeros((d, d)), a: Array2::zeros((d, d)), b: Array2::zeros((d, d)) }
    }
}

/// `𝓛ρ` by operator products, without materializing the superoperator.
pub fn lindblad_action(params: &ModelParams, rho: &Array2<C64>) -> Result<Array2<C64>> {
    LindbladGenerator::spin_model(params)?.apply(rho)
}

/// Index map between vectorized positions and matrix units `|i⟩⟨j|`.
#[derive(Clone, Debug, PartialEq)]
pub enum VecLayout {
    /// All `d²` units, position `i·d + j`.
    Full { dim: usize },
    /// A subset of units, closed under `(i, j) ↔ (j, i)`, in the listed order.
    Units { dim: usize, units: Vec<(usize, usize)>, lookup: Vec<usize> },
}

impl VecLayout {
    pub fn full(dim: usize) -> Self {
        VecLayout::Full { dim }
    }

    pub fn from_units(dim: usize, units: Vec<(usize, usize)>) -> Result<Self> {
        let mut lookup = vec![usize::MAX; dim * dim];
        for (p, &(i, j)) in units.iter().enumerate() {
            if i >= dim || j >= dim {
                return Err(Error::InvalidParameter(format!("unit ({i}, {j}) outside dimension {dim}")));
            }
            lookup[i * dim + j] = p;
        }
        for &(i, j) in &units {
            if lookup[j * dim + i] == usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "unit set must be closed under transposition; ({j}, {i}) missing"
                )));
            }
        }
        Ok(VecLayout::Units { dim, units, lookup })
    }

    /// Operator-space dimension `d`.
    pub fn hilbert_dim(&self) -> usize {
        match self {
            VecLayout::Full { dim } | VecLayout::Units { dim, .. } => *dim,
        }
    }

    /// Number of vectorized coordinates.
    pub fn len(&self) -> usize {
        match self {
            VecLayout::Full { dim } => dim * dim,
            VecLayout::Units { units, .. } => units.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unit(&self, p: usize) -> (usize, usize) {
        match self {
            VecLayout::Full { dim } => (p / dim, p % dim),
            VecLayout::Units { units, .. } => units[p],
        }
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        match self {
            VecLayout::Full { dim } => (i < *dim && j < *dim).then_some(i * dim + j),
            VecLayout::Units { dim, lookup, .. } => {
                let p = *lookup.get(i * dim + j)?;
                (p != usize::MAX).then_some(p)
            }
        }
    }

    pub fn reshape(&self, v: ArrayView1<C64>) -> Array2<C64> {
        let d = self.hilbert_dim();
        let mut m = Array2::zeros((d, d));
        for (p, z) in v.iter().enumerate() {
            let (i, j) = self.unit(p);
            m[[i, j]] = *z;
        }
        m
    }

    pub fn vectorize(&self, m: &Array2<C64>) -> Array1<C64> {
        Array1::from_shape_fn(self.len(), |p| {
            let (i, j) = self.unit(p);
            m[[i, j]]
        })
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Array2<C64>),
    Diagonal(Array1<C64>),
}

/// Matrix acting on vectorized operators.
#[derive(Clone, Debug)]
pub struct SuperOperatorMatrix {
    layout: VecLayout,
    storage: Storage,
}

impl SuperOperatorMatrix {
    pub fn dense(layout: VecLayout, matrix: Array2<C64>) -> Result<Self> {
        let n = layout.len();
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(Self { layout, storage: Storage::Dense(matrix) })
    }

    pub fn diagonal(layout: VecLayout, diag: Array1<C64>) -> Result<Self> {
        if diag.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), found: diag.len() });
        }
        Ok(Self { layout, storage: Storage::Diagonal(diag) })
    }

    pub fn layout(&self) -> &VecLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn matrix(&self) -> Cow<'_, Array2<C64>> {
        match &self.storage {
            Storage::Dense(m) => Cow::Borrowed(m),
            Storage::Diagonal(d) => Cow::Owned(Array2::from_diag(d)),
        }
    }

    /// The diagonal, if this operator is stored (or happens to be) diagonal.
    pub fn as_diagonal(&self) -> Option<Cow<'_, Array1<C64>>> {
        match &self.storage {
            Storage::Diagonal(d) => Some(Cow::Borrowed(d)),
            Storage::Dense(m) => {
                let n = m.nrows();
                let off = (0..n).all(|i| (0..n).all(|j| i == j || m[[i, j]] == c64(0.0, 0.0)));
                off.then(|| Cow::Owned(m.diag().to_owned()))
            }
        }
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        match &self.storage {
            Storage::Dense(m) => m.dot(v),
            Storage::Diagonal(d) => d * v,
        }
    }

    /// `Σ_i M[(i,i), q]` for every column `q`: the row `vec(𝟙)ᵀ·M`.
    pub fn identity_left_residual(&self) -> f64 {
        let m = self.matrix();
        let d = self.layout.hilbert_dim();
        let diag_rows: Vec<usize> = (0..d).filter_map(|i| self.layout.position(i, i)).collect();
        (0..self.dim())
            .map(|q| diag_rows.iter().map(|&p| m[[p, q]]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Superoperator of `𝓛ρ = Gρ + ρG† + Σ LρL†` on the units of `layout`.
pub fn assemble_superoperator(generator: &LindbladGenerator, layout: VecLayout) -> Result<SuperOperatorMatrix> {
    let d = generator.dim();
    if layout.hilbert_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: layout.hilbert_dim() });
    }
    let n = layout.len();
    let g = generator.effective();
    let g_conj = g.mapv(|z| z.conj());
    let jumps = generator.jumps();
    let jumps_conj: Vec<_> = jumps.iter().map(|l| l.mapv(|z| z.conj())).collect();
    let mut m = Array2::<C64>::zeros((n, n));
    for q in 0..n {
        let (k, l) = layout.unit(q);
        for p in 0..n {
            let (i, j) = layout.unit(p);
            let mut v = c64(0.0, 0.0);
            if j == l {
                v += g[[i, k]];
            }
            if i == k {
                v += g_conj[[j, l]];
            }
            for (jl, jc) in jumps.iter().zip(&jumps_conj) {
                v += jl[[i, k]] * jc[[j, l]];
            }
            m[[p, q]] = v;
        }
    }
    SuperOperatorMatrix::dense(layout, m)
}

/// Full `d² × d²` Lindbladian, refused above `budget` (`d²`).
pub fn lindblad_superoperator(params: &ModelParams, budget: Option<usize>) -> Result<SuperOperatorMatrix> {
    let d = params.dim();
    let budget = budget.unwrap_or(DEFAULT_SUPEROPERATOR_BUDGET);
    if d * d > budget {
        return Err(Error::TooLarge { dim2: d * d, budget });
    }
    let generator = LindbladGenerator::spin_model(params)?;
    assemble_superoperator(&generator, VecLayout::full(d))
}

/// `Ad_P ρ = P†ρP` in the full layout; diagonal with entries `±1`.
pub fn parity_superoperator(spin: Spin) -> SuperOperatorMatrix {
    let d = spin.dim();
    let layout = VecLayout::full(d);
    let diag = Array1::from_shape_fn(d * d, |p| {
        let (i, j) = (p / d, p % d);
        let s = Spin::index_parity(i) * Spin::index_parity(j);
        c64(f64::from(s), 0.0)
    });
    SuperOperatorMatrix::diagonal(layout, diag).expect("layout and diagonal agree")
}

/// Energy window for the band-limited restriction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandLimit {
    /// `|E_i − E_j| ≤ window · ω_b`.
    GapUnits(f64),
    /// `|E_i − E_j| ≤ window`.
    Absolute(f64),
}

impl Default for BandLimit {
    fn default() -> Self {
        BandLimit::GapUnits(DEFAULT_BAND_WINDOW)
    }
}

type SparseVec = Vec<(usize, f64)>;

/// The `K` lowest eigenstates of `H_S`, each of definite parity.
#[derive(Clone, Debug)]
pub struct RestrictedBasis {
    pub spin: Spin,
    /// Ascending energies.
    pub energies: Array1<f64>,
    /// Parity label `±1` of each state (eigenvalue of `exp(iπ(S − S_z))`).
    pub parities: Vec<i8>,
    /// Real eigenvectors as columns, `d × K`.
    pub vectors: Array2<f64>,
}

impl RestrictedBasis {
    /// Diagonalizes `H_S` separately in the two parity blocks (each is
    /// tridiagonal) and keeps the `k` lowest states overall. Parity blocks
    /// keep exponentially degenerate doublets from mixing.
    pub fn lowest(params: &ModelParams, k: usize) -> Result<Self> {
        params.validate()?;
        let spin = params.spin;
        let d = spin.dim();
        if k == 0 || k > d {
            return Err(Error::InvalidParameter(format!("subspace size K = {k} must be in 1..={d}")));
        }
        let (sx2_diag, sx2_off) = spin_algebra::sx_squared_bands(spin);
        let scale = params.coupling / (2.0 * params.s());
        // (energy, parity, sparse eigenvector)
        let mut states: Vec<(f64, i8, SparseVec)> = Vec::with_capacity(2 * k);
        for block_parity in [1i8, -1] {
            // S_x² couples k to k ± 2 only: each parity block is tridiagonal.
            let idx: Vec<usize> = (0..d).filter(|&i| Spin::index_parity(i) == block_parity).collect();
            if idx.is_empty() {
                continue;
            }
            let diag: Vec<f64> = idx.iter().map(|&i| -scale * sx2_diag[i] - spin.m(i)).collect();
            let off: Vec<f64> = idx[..idx.len() - 1].iter().map(|&i| -scale * sx2_off[i]).collect();
            let want = k.min(idx.len());
            let (w, v) = linalg::tridiagonal_lowest(&diag, &off, want)
                .map_err(|e| Error::Eigensolver(format!("H_S parity block: {e}")))?;
            for (c, &e) in w.iter().enumerate() {
                let support = idx.iter().enumerate().map(|(a, &i)| (i, v[[a, c]])).collect();
                states.push((e, block_parity, support));
            }
        }
        states.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        states.truncate(k);
        let energies = Array1::from_iter(states.iter().map(|s| s.0));
        let parities = states.iter().map(|s| s.1).collect();
        let mut vectors = Array2::zeros((d, k));
        for (c, s) in states.iter().enumerate() {
            for &(i, x) in &s.2 {
                vectors[[i, c]] = x;
            }
        }
        Ok(Self { spin, energies, parities, vectors })
    }

    pub fn size(&self) -> usize {
        self.energies.len()
    }

    /// `V ρ Vᵀ`: embeds a `K × K` operator into the full space.
    pub fn lift(&self, rho: &Array2<C64>) -> Array2<C64> {
        let v = linalg::real(&self.vectors);
        v.dot(rho).dot(&v.t())
    }

    /// `Vᵀ A V`.
    pub fn project(&self, a: &Array2<C64>) -> Array2<C64> {
        let v = linalg::real(&self.vectors);
        v.t().dot(a).dot(&v)
    }

    /// `Ad_P` on the units of `layout` (which must refer to this basis).
    pub fn parity_superoperator(&self, layout: &VecLayout) -> SuperOperatorMatrix {
        let diag = Array1::from_shape_fn(layout.len(), |p| {
            let (i, j) = layout.unit(p);
            c64(f64::from(self.parities[i] * self.parities[j]), 0.0)
        });
        SuperOperatorMatrix::diagonal(layout.clone(), diag).expect("same layout")
    }
}

/// Lindbladian restricted to the `k` lowest eigenstates of `H_S`.
///
/// The spin components are projected, `V†S_αV`, and `H_S`, `H_γ` and `L` are
/// rebuilt from the projections, so the restricted generator is again of
/// Lindblad form (trace preserving, Hermiticity preserving). With `band`,
/// only units `|i⟩⟨j|` with `|E_i − E_j|` inside the window are kept.
pub fn restricted_superoperator(
    params: &ModelParams,
    k: usize,
    band: Option<BandLimit>,
) -> Result<(SuperOperatorMatrix, RestrictedBasis)> {
    let basis = RestrictedBasis::lowest(params, k)?;
    let generator = restricted_generator(params, &basis)?;
    let layout = match band {
        None => VecLayout::full(k),
        Some(limit) => {
            let window = match limit {
                BandLimit::Absolute(w) => w,
                BandLimit::GapUnits(units) => units * gap_scale(params, &basis)?,
            };
            let mut units = Vec::new();
            for i in 0..k {
                for j in 0..k {
                    if (basis.energies[i] - basis.energies[j]).abs() <= window {
                        units.push((i, j));
                    }
                }
            }
            VecLayout::from_units(k, units)?
        }
    };
    let superop = assemble_superoperator(&generator, layout)?;
    Ok((superop, basis))
}

/// Lindblad generator on the span of `basis`.
pub fn restricted_generator(params: &ModelParams, basis: &RestrictedBasis) -> Result<LindbladGenerator> {
    let (px, pa, pz) = spin_algebra::project_components(params.spin, basis.vectors.view());
    let sx = linalg::real(&px);
    let sy = linalg::real(&pa) * c64(0.0, -1.0);
    let sz = linalg::real(&pz);
    let s = params.s();
    let h_s = sx.dot(&sx) * c64(-params.coupling / (2.0 * s), 0.0) - &sz;
    let h_g = linalg::anticommutator(&sx, &sy) * c64(params.dissipation / (4.0 * s), 0.0);
    let l = jump_from_components(params, &sx, &sy);
    LindbladGenerator::new(h_s + h_g, vec![l])
}

fn gap_scale(params: &ModelParams, basis: &RestrictedBasis) -> Result<f64> {
    match HpParams::new(params.coupling, params.temperature) {
        Ok(hp) => Ok(hp.omega_b),
        Err(Error::CriticalPoint) => {
            // ω_b vanishes at Λ = 1; fall back to the numerical level spacing.
            let e = &basis.energies;
            Ok(if e.len() > 2 { (e[2] - e[0]) / 2.0 } else { 1.0 })
        }
        Err(e) => Err(e),
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix(Array2<C64>);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(m: Array2<C64>) -> Result<Self> {
        Self::with_positivity_tolerance(m, Self::POSITIVITY_TOL)
    }

    pub fn with_positivity_tolerance(m: Array2<C64>, pos_tol: f64) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.ncols() });
        }
        let herm = linalg::hermiticity_defect(&m);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(&m);
        if (tr - c64(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} ≠ 1")));
        }
        let min = linalg::min_eigenvalue(&m)?;
        if min < -pos_tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(m))
    }

    pub fn from_matrix_unchecked(m: Array2<C64>) -> Self {
        Self(m)
    }

    pub fn pure(psi: &Array1<C64>) -> Self {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let d = psi.len();
        let m = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj() / norm2);
        Self(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(linalg::identity(d) / c64(d as f64, 0.0))
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `Tr(ρ A)`.
    pub fn expectation(&self, a: &Array2<C64>) -> C64 {
        linalg::trace_product(&self.0, a)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.0, &self.0).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(&self.0)
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        linalg::trace_distance(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, hermiticity_defect, max_abs, trace};
    use ndarray_linalg::EigVals;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((d, d), |_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_density(d: usize, seed: u64) -> Array2<C64> {
        let a = random_matrix(d, seed);
        let m = a.dot(&dagger(&a));
        let tr = trace(&m);
        m / tr
    }

    fn params(s: f64, lambda: f64, gamma: f64, t: f64) -> ModelParams {
        ModelParams::new(s, lambda, gamma, t).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(2.0, -0.1, 0.1, 1.0).is_err());
        assert!(ModelParams::new(2.0, 0.1, -0.1, 1.0).is_err());
        assert!(ModelParams::new(2.0, 0.1, 0.1, 0.0).is_err());
        let mut p = params(2.0, 0.1, 0.1, 1.0);
        p.temperature = -1.0;
        assert!(matches!(jump_operator(&p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn free_spin_hamiltonian() {
        let p = params(3.0, 0.0, 0.1, 1.0);
        let h = hamiltonian_system(&p);
        let sz = spin_algebra::spin_operators(p.spin).z;
        assert!(max_abs(&(h + &sz)) < 1e-14);
        let e = linalg::eigvalsh(&hamiltonian_system(&p)).unwrap();
        assert!((e[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn spin_one_ground_energy() {
        // brute force: −S_x² − S_z at S = 1
        let p = params(1.0, 2.0, 0.0, 1.0);
        let ops = spin_algebra::spin_operators(p.spin);
        let brute = ops.x.dot(&ops.x) * c64(-1.0, 0.0) - &ops.z;
        let e_brute = linalg::eigvalsh(&brute).unwrap()[0];
        let e = linalg::eigvalsh(&hamiltonian_system(&p)).unwrap()[0];
        assert!((e - e_brute).abs() < 1e-12);
        // analytic value: lowest root of the even block, −(1 + √5)/2·… checked loosely
        assert!(e < -1.0);
    }

    #[test]
    fn hamiltonian_gamma_cases() {
        assert!(max_abs(&hamiltonian_gamma(&params(2.0, 1.0, 0.0, 1.0))) == 0.0);
        assert!(max_abs(&hamiltonian_gamma(&params(0.5, 1.0, 0.7, 1.0))) < 1e-15);
        let h = hamiltonian_gamma(&params(2.0, 1.0, 1.0, 1.0));
        assert!(hermiticity_defect(&h) < 1e-14);
        assert!(trace(&h).norm() < 1e-14);
    }

    #[test]
    fn jump_operator_spin_one_entries() {
        let p = params(1.0, 0.5, 0.1, 4.0);
        let l = jump_operator(&p).unwrap();
        // hand-built: √(2γT/S)(S_x + i S_y/(4T)), S_x, S_y from ladder √2
        let pref = (2.0 * 0.1 * 4.0_f64).sqrt();
        let r = std::f64::consts::SQRT_2 / 2.0;
        let expected_upper = pref * (r + r / 16.0);
        let expected_lower = pref * (r - r / 16.0);
        for (a, b) in [(0, 1), (1, 2)] {
            assert!((l[[a, b]] - c64(expected_upper, 0.0)).norm() < 1e-14);
            assert!((l[[b, a]] - c64(expected_lower, 0.0)).norm() < 1e-14);
        }
        assert!(max_abs(&jump_operator(&params(1.0, 0.5, 0.0, 4.0)).unwrap()) == 0.0);
    }

    #[test]
    fn jump_operator_is_parity_odd() {
        for s in [1.0, 2.5, 4.0] {
            let p = params(s, 1.3, 0.2, 3.0);
            let l = jump_operator(&p).unwrap();
            let pm = spin_algebra::parity_operator(p.spin);
            assert!(max_abs(&(dagger(&pm).dot(&l).dot(&pm) + &l)) < 1e-12);
        }
    }

    #[test]
    fn action_is_trace_free_and_hermiticity_preserving() {
        let p = params(3.0, 1.5, 0.3, 2.0);
        for seed in 0..4 {
            let rho = random_density(p.dim(), seed);
            let out = lindblad_action(&p, &rho).unwrap();
            assert!(trace(&out).norm() < 1e-12);
            assert!(hermiticity_defect(&out) < 1e-12);
            // arbitrary (non-Hermitian) input: still traceless
            let a = random_matrix(p.dim(), seed + 10);
            assert!(trace(&lindblad_action(&p, &a).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn action_matches_textbook_formula() {
        let p = params(2.0, 0.8, 0.4, 1.5);
        let rho = random_matrix(p.dim(), 3);
        let h = hamiltonian_system(&p) + hamiltonian_gamma(&p);
        let l = jump_operator(&p).unwrap();
        let ld = dagger(&l);
        let ldl = ld.dot(&l);
        let expected = (rho.dot(&h) - h.dot(&rho)) * linalg::I + l.dot(&rho).dot(&ld)
            - (ldl.dot(&rho) + rho.dot(&ldl)) * c64(0.5, 0.0);
        let got = lindblad_action(&p, &rho).unwrap();
        assert!(max_abs(&(got - expected)) < 1e-12);
    }

    #[test]
    fn hermitian_action_matches_general() {
        let p = params(4.5, 1.7, 0.3, 2.0);
        let g = LindbladGenerator::spin_model(&p).unwrap();
        let mut work = ActionWorkspace::new(p.dim());
        let mut out = Array2::zeros((p.dim(), p.dim()));
        for seed in 0..3 {
            let rho = random_density(p.dim(), seed);
            g.apply_hermitian_into(&rho, &mut out, &mut work);
            assert!(max_abs(&(&out - &g.apply(&rho).unwrap())) < 1e-12);
        }
    }

    #[test]
    fn unitary_case_annihilates_eigenprojectors() {
        let p = params(3.0, 0.7, 0.0, 1.0);
        let (_, v) = linalg::eigh(&hamiltonian_system(&p)).unwrap();
        let psi = v.column(2).to_owned();
        let rho = DensityMatrix::pure(&psi);
        assert!(max_abs(&lindblad_action(&p, rho.matrix()).unwrap()) < 1e-12);
    }

    #[test]
    fn action_rejects_wrong_dimension() {
        let p = params(2.0, 0.8, 0.4, 1.5);
        assert!(matches!(
            lindblad_action(&p, &Array2::zeros((3, 3))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn superoperator_matches_action() {
        let p = params(3.0, 1.2, 0.25, 2.0);
        let sup = lindblad_superoperator(&p, None).unwrap();
        assert!(sup.identity_left_residual() < 1e-12);
        for seed in 0..3 {
            let rho = random_matrix(p.dim(), seed);
            let v = sup.layout().vectorize(&rho);
            let via_matrix = sup.layout().reshape(sup.apply(&v).view());
            let via_action = lindblad_action(&p, &rho).unwrap();
            assert!(max_abs(&(via_matrix - via_action)) < 1e-12);
        }
    }

    #[test]
    fn superoperator_budget() {
        let p = params(40.0, 1.2, 0.25, 2.0);
        assert!(matches!(lindblad_superoperator(&p, None), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn vec_convention_left_right_action() {
        // vec(AρB) = (A ⊗ Bᵀ) vec(ρ)
        let d = 3;
        let a = random_matrix(d, 1);
        let b = random_matrix(d, 2);
        let rho = random_matrix(d, 3);
        let layout = VecLayout::full(d);
        let lhs = layout.vectorize(&a.dot(&rho).dot(&b));
        let rhs = linalg::kron(&a, &b.t().to_owned()).dot(&layout.vectorize(&rho));
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn unitary_spectrum_is_energy_differences() {
        let p = params(2.0, 0.9, 0.0, 1.0);
        let sup = lindblad_superoperator(&p, None).unwrap();
        let ev = sup.matrix().eigvals().unwrap();
        let e = linalg::eigvalsh(&hamiltonian_system(&p)).unwrap();
        for lam in ev.iter() {
            assert!(lam.re.abs() < 1e-10);
            let hit = e.iter().any(|ei| e.iter().any(|ej| (lam.im - (ej - ei)).abs() < 1e-9));
            assert!(hit, "eigenvalue {lam} is not an energy difference");
        }
    }

    #[test]
    fn parity_superoperator_properties() {
        let p = params(4.0, 1.5, 0.2, 4.0);
        let adp = parity_superoperator(p.spin);
        let layout = adp.layout().clone();
        let d = p.dim();
        // diagonal projectors are even
        for i in 0..d {
            let mut m = Array2::zeros((d, d));
            m[[i, i]] = c64(1.0, 0.0);
            let v = layout.vectorize(&m);
            assert!((adp.apply(&v) - &v).iter().all(|z| z.norm() < 1e-15));
        }
        // S_x is odd
        let sx = spin_algebra::spin_operators(p.spin).x;
        let v = layout.vectorize(&sx);
        assert!((adp.apply(&v) + &v).iter().all(|z| z.norm() < 1e-15));
        // involutory
        let diag = adp.as_diagonal().unwrap();
        assert!(diag.iter().all(|z| (z * z - c64(1.0, 0.0)).norm() < 1e-15));
        // commutes with the Lindbladian
        let sup = lindblad_superoperator(&p, None).unwrap();
        let l = sup.matrix();
        let pm = adp.matrix();
        assert!(max_abs(&(pm.dot(&*l) - l.dot(&*pm))) < 1e-10);
    }

    #[test]
    fn parity_superoperator_matches_conjugation() {
        for s in [1.5, 2.0] {
            let spin = Spin::new(s).unwrap();
            let p = spin_algebra::parity_operator(spin);
            let adp = parity_superoperator(spin);
            let rho = random_matrix(spin.dim(), 9);
            let direct = dagger(&p).dot(&rho).dot(&p);
            let via = adp.layout().reshape(adp.apply(&adp.layout().vectorize(&rho)).view());
            assert!(max_abs(&(direct - via)) < 1e-12);
        }
    }

    #[test]
    fn restricted_full_size_matches_full_spectrum() {
        let p = params(5.0, 1.4, 0.3, 2.0);
        let full = lindblad_superoperator(&p, Some(200)).unwrap();
        let (restricted, basis) = restricted_superoperator(&p, p.dim(), None).unwrap();
        assert_eq!(basis.size(), 11);
        assert!(restricted.identity_left_residual() < 1e-10);
        let mut a: Vec<C64> = full.matrix().eigvals().unwrap().to_vec();
        let mut b: Vec<C64> = restricted.matrix().eigvals().unwrap().to_vec();
        let key = |z: &C64| (z.re * 1e6).round() as i64 * 1_000_000_000 + (z.im * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn restricted_unitary_is_imaginary() {
        let p = params(6.0, 0.5, 0.0, 2.0);
        let (sup, _) = restricted_superoperator(&p, 6, None).unwrap();
        for z in sup.matrix().eigvals().unwrap().iter() {
            assert!(z.re.abs() < 1e-10);
        }
    }

    #[test]
    fn restricted_band_keeps_diagonal_units() {
        let p = params(20.0, 0.5, 0.1, 4.0);
        let (sup, basis) = restricted_superoperator(&p, 12, Some(BandLimit::GapUnits(2.5))).unwrap();
        let layout = sup.layout();
        assert!(layout.len() < 144);
        for i in 0..basis.size() {
            assert!(layout.position(i, i).is_some());
        }
        assert!(sup.identity_left_residual() < 1e-10);
        let adp = basis.parity_superoperator(layout);
        assert_eq!(adp.dim(), layout.len());
    }

    #[test]
    fn restricted_rejects_oversized_subspace() {
        let p = params(2.0, 0.5, 0.1, 4.0);
        assert!(restricted_superoperator(&p, 6, None).is_err());
    }

    #[test]
    fn restricted_basis_for_large_spin() {
        let p = params(3000.0, 2.0, 0.2, 4.0);
        let (sup, basis) = restricted_superoperator(&p, 101, Some(BandLimit::default())).unwrap();
        assert_eq!(basis.vectors.dim(), (6001, 101));
        assert!(sup.dim() <= 101 * 101);
        // ground-state doublet is degenerate to machine precision at this size
        assert!((basis.energies[1] - basis.energies[0]).abs() < 1e-8);
        assert_ne!(basis.parities[0], basis.parities[1]);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(random_density(4, 1)).is_ok());
        let mut bad = random_density(4, 1);
        bad[[0, 1]] += c64(0.1, 0.0);
        assert!(DensityMatrix::new(bad).is_err());
        let neg = Array2::from_diag(&ndarray::arr1(&[c64(1.5, 0.0), c64(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPositive(_))));
        let mm = DensityMatrix::maximally_mixed(5);
        assert!((mm.purity() - 0.2).abs() < 1e-14);
    }
}
