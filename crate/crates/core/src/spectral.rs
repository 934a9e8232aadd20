// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spectra of Lindbladian superoperators, parity sectors, stationary and
//! metastable states.
//!
//! A Hermiticity-preserving superoperator is real in the Hermitian operator
//! basis `{|i⟩⟨i|, (|i⟩⟨j| + |j⟩⟨i|)/√2, i(|i⟩⟨j| − |j⟩⟨i|)/√2}`. Blocks are
//! transformed to that basis before calling LAPACK, so real eigenvalues come
//! out exactly real and the decomposition runs in real arithmetic. The
//! complex path is kept as a fallback.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eig, EigVals, Factorize, Solve};
use serde::Serialize;

use crate::linalg::{self, c64, C64};
use crate::lmg_model::{
    restricted_superoperator, BandLimit, DensityMatrix, ModelParams, SuperOperatorMatrix, VecLayout,
};
use crate::spin_algebra::{self, Spin};
use crate::{Error, Result};

/// Above this many vectorized coordinates the sector-projected path is used
/// directly.
pub const SECTOR_SPLIT_THRESHOLD: usize = 2000;
/// Eigenvalues closer than this to zero count as stationary.
pub const ZERO_TOL: f64 = 1e-8;
/// Minimum `|⟨v|Ad_P|v⟩|/⟨v|v⟩` for a sector label on the full path.
pub const SECTOR_OVERLAP_MIN: f64 = 0.9;
pub const DEFAULT_PAIR_WINDOW: usize = 12;
pub const DEFAULT_PAIR_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct DiagonalizeOptions {
    pub eigenvectors: bool,
    /// Use the sector-projected path regardless of size.
    pub force_sectors: bool,
}

impl Default for DiagonalizeOptions {
    fn default() -> Self {
        Self { eigenvectors: true, force_sectors: false }
    }
}

impl DiagonalizeOptions {
    pub fn eigenvalues_only() -> Self {
        Self { eigenvectors: false, force_sectors: true }
    }
}

/// Eigenpairs sorted by descending real part, then ascending `|Im|`, with the
/// non-negative imaginary member of a conjugate pair first.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm columns in the coordinates of `layout`.
    pub eigenvectors: Option<Array2<C64>>,
    /// `±1` per eigenpair.
    pub sectors: Vec<i8>,
    pub layout: VecLayout,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Flags the conjugate partners with `Im λ < 0`.
    pub fn negative_imaginary(&self) -> Vec<bool> {
        self.eigenvalues.iter().map(|z| z.im < 0.0).collect()
    }

    /// Indices with `Im λ ≥ 0`, in stored order.
    pub fn reported(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.eigenvalues[k].im >= 0.0).collect()
    }

    /// Reported indices of one sector.
    pub fn sector_indices(&self, sector: i8) -> Vec<usize> {
        self.reported().into_iter().filter(|&k| self.sectors[k] == sector).collect()
    }

    pub fn eigenmatrix(&self, k: usize) -> Option<Array2<C64>> {
        let v = self.eigenvectors.as_ref()?;
        Some(self.layout.reshape(v.column(k)))
    }
}

/// Index bookkeeping for the Hermitian operator basis of a coordinate subset.
struct HermitianBasis {
    /// Per real coordinate: one or two `(local position, coefficient)` terms.
    columns: Vec<Vec<(usize, C64)>>,
    /// Real coordinates that are diagonal units `|i⟩⟨i|`.
    diagonal: Vec<usize>,
}

impl HermitianBasis {
    /// `positions` must be closed under `(i, j) ↔ (j, i)`.
    fn new(layout: &VecLayout, positions: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; layout.len()];
        for (a, &p) in positions.iter().enumerate() {
            local[p] = a;
        }
        let mut columns = Vec::with_capacity(positions.len());
        let mut diagonal = Vec::new();
        let r = c64(FRAC_1_SQRT_2, 0.0);
        let ri = c64(0.0, FRAC_1_SQRT_2);
        for (a, &p) in positions.iter().enumerate() {
            let (i, j) = layout.unit(p);
            if i == j {
                diagonal.push(columns.len());
                columns.push(vec![(a, c64(1.0, 0.0))]);
            } else if i < j {
                let b = layout
                    .position(j, i)
                    .map(|q| local[q])
                    .filter(|&b| b != usize::MAX)
                    .ok_or_else(|| Error::InvalidParameter(format!("unit ({j}, {i}) missing from block")))?;
                columns.push(vec![(a, r), (b, r)]);
                columns.push(vec![(a, ri), (b, -ri)]);
            }
        }
        debug_assert_eq!(columns.len(), positions.len());
        Ok(Self { columns, diagonal })
    }

    fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `U† M U` where `U` maps real coordinates to block positions. Returns
    /// `None` if the result is not real (operator not Hermiticity preserving).
    fn transform(&self, m: &Array2<C64>, positions: &[usize]) -> Option<Array2<f64>> {
        let n = self.dim();
        // A = M[block, block] · U
        let mut a = Array2::<C64>::zeros((n, n));
        for (r, col) in self.columns.iter().enumerate() {
            for (row, &p) in positions.iter().enumerate() {
                let mut acc = c64(0.0, 0.0);
                for &(loc, coeff) in col {
                    acc += m[[p, positions[loc]]] * coeff;
                }
                a[[row, r]] = acc;
            }
        }
        let mut out = Array2::<f64>::zeros((n, n));
        let mut worst_im = 0.0_f64;
        let mut scale = 0.0_f64;
        for (rp, col) in self.columns.iter().enumerate() {
            for r in 0..n {
                let mut acc = c64(0.0, 0.0);
                for &(loc, coeff) in col {
                    acc += coeff.conj() * a[[loc, r]];
                }
                out[[rp, r]] = acc.re;
                worst_im = worst_im.max(acc.im.abs());
                scale = scale.max(acc.re.abs());
            }
        }
        (worst_im <= 1e-12 * scale.max(1.0)).then_some(out)
    }

    /// Block coordinates of a vector given in real coordinates.
    fn lift(&self, w: ArrayView1<C64>) -> Array1<C64> {
        let mut v = Array1::zeros(self.dim());
        for (r, col) in self.columns.iter().enumerate() {
            for &(loc, coeff) in col {
                v[loc] += coeff * w[r];
            }
        }
        v
    }
}

fn parity_diagonal(parity: &SuperOperatorMatrix) -> Option<Vec<i8>> {
    let diag = parity.as_diagonal()?;
    diag.iter()
        .map(|z| {
            if (z - c64(1.0, 0.0)).norm() < 1e-12 {
                Some(1)
            } else if (z + c64(1.0, 0.0)).norm() < 1e-12 {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

fn check_same_layout(superop: &SuperOperatorMatrix, parity: &SuperOperatorMatrix) -> Result<()> {
    if superop.dim() != parity.dim() {
        return Err(Error::DimensionMismatch { expected: superop.dim(), found: parity.dim() });
    }
    Ok(())
}

struct BlockEig {
    values: Vec<C64>,
    /// Columns in block coordinates.
    vectors: Option<Array2<C64>>,
}

/// Eigen-decomposition of `M[positions, positions]`.
fn block_eig(m: &Array2<C64>, layout: &VecLayout, positions: &[usize], vectors: bool) -> Result<BlockEig> {
    let n = positions.len();
    if n == 0 {
        return Ok(BlockEig { values: vec![], vectors: vectors.then(|| Array2::zeros((0, 0))) });
    }
    let basis = HermitianBasis::new(layout, positions)?;
    if let Some(real) = basis.transform(m, positions) {
        let real = linalg::column_major(&real);
        if vectors {
            let (vals, w) = real.eig().map_err(|e| Error::Eigensolver(e.to_string()))?;
            let mut out = Array2::zeros((n, n));
            for k in 0..n {
                let mut v = basis.lift(w.column(k));
                normalize(&mut v);
                out.column_mut(k).assign(&v);
            }
            return Ok(BlockEig { values: vals.to_vec(), vectors: Some(out) });
        }
        let vals = real.eigvals().map_err(|e| Error::Eigensolver(e.to_string()))?;
        return Ok(BlockEig { values: vals.to_vec(), vectors: None });
    }
    let block = linalg::column_major(&Array2::from_shape_fn((n, n), |(a, b)| m[[positions[a], positions[b]]]));
    if vectors {
        let (vals, mut w) = block.eig().map_err(|e| Error::Eigensolver(e.to_string()))?;
        for mut col in w.columns_mut() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            col.mapv_inplace(|z| z / norm);
        }
        Ok(BlockEig { values: vals.to_vec(), vectors: Some(w) })
    } else {
        let vals = block.eigvals().map_err(|e| Error::Eigensolver(e.to_string()))?;
        Ok(BlockEig { values: vals.to_vec(), vectors: None })
    }
}

fn normalize(v: &mut Array1<C64>) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|z| z / norm);
    }
}

fn spectral_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re)
        .then(a.im.abs().total_cmp(&b.im.abs()))
        .then(b.im.total_cmp(&a.im))
}

fn finish(
    layout: &VecLayout,
    mut entries: Vec<(C64, i8, Option<Array1<C64>>)>,
    vectors: bool,
) -> SpectrumResult {
    entries.sort_by(|a, b| spectral_order(&a.0, &b.0));
    let n = layout.len();
    let eigenvectors = vectors.then(|| {
        let mut m = Array2::zeros((n, entries.len()));
        for (k, e) in entries.iter().enumerate() {
            if let Some(v) = &e.2 {
                m.column_mut(k).assign(v);
            }
        }
        m
    });
    SpectrumResult {
        eigenvalues: entries.iter().map(|e| e.0).collect(),
        sectors: entries.iter().map(|e| e.1).collect(),
        eigenvectors,
        layout: layout.clone(),
    }
}

fn diagonalize_sectors(
    superop: &SuperOperatorMatrix,
    signs: &[i8],
    vectors: bool,
) -> Result<SpectrumResult> {
    let layout = superop.layout();
    let m = superop.matrix();
    let mut entries = Vec::with_capacity(superop.dim());
    for sector in [1i8, -1] {
        let positions: Vec<usize> = (0..signs.len()).filter(|&p| signs[p] == sector).collect();
        let eig = block_eig(&m, layout, &positions, vectors)?;
        for (k, &lam) in eig.values.iter().enumerate() {
            let v = eig.vectors.as_ref().map(|w| {
                let mut full = Array1::zeros(layout.len());
                for (a, &p) in positions.iter().enumerate() {
                    full[p] = w[[a, k]];
                }
                full
            });
            entries.push((lam, sector, v));
        }
    }
    Ok(finish(layout, entries, vectors))
}

/// Eigen-decomposition with parity labels.
///
/// Small problems are diagonalized whole and each eigenvector is labelled by
/// `sign Re(v†Ad_P v/v†v)`; if any label is ambiguous the computation is
/// redone within the `Ad_P = ±1` eigenspaces. Large problems, and
/// eigenvalue-only requests with [`DiagonalizeOptions::eigenvalues_only`],
/// go straight to the sector path.
pub fn diagonalize(
    superop: &SuperOperatorMatrix,
    parity: &SuperOperatorMatrix,
    opts: DiagonalizeOptions,
) -> Result<SpectrumResult> {
    check_same_layout(superop, parity)?;
    let signs = parity_diagonal(parity);
    let n = superop.dim();
    if let Some(signs) = &signs {
        if opts.force_sectors || n > SECTOR_SPLIT_THRESHOLD || !opts.eigenvectors {
            return diagonalize_sectors(superop, signs, opts.eigenvectors);
        }
    }
    let layout = superop.layout();
    let m = superop.matrix();
    let all: Vec<usize> = (0..n).collect();
    let eig = block_eig(&m, layout, &all, true)?;
    let w = eig.vectors.expect("requested");
    let pm = parity.matrix();
    let mut entries = Vec::with_capacity(n);
    for (k, &lam) in eig.values.iter().enumerate() {
        let v = w.column(k).to_owned();
        let pv = pm.dot(&v);
        let num: C64 = v.iter().zip(pv.iter()).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let ratio = num.re / den;
        if ratio.abs() < SECTOR_OVERLAP_MIN {
            return match &signs {
                Some(signs) => diagonalize_sectors(superop, signs, opts.eigenvectors),
                None => Err(Error::MixedSector { index: k, overlap: ratio }),
            };
        }
        entries.push((lam, if ratio > 0.0 { 1 } else { -1 }, opts.eigenvectors.then_some(v)));
    }
    Ok(finish(layout, entries, opts.eigenvectors))
}

/// Reshapes, Hermitizes and trace-normalizes a kernel vector.
fn normalize_state(m: Array2<C64>) -> Result<DensityMatrix> {
    let mut rho = linalg::hermitian_part(&m);
    let tr = linalg::trace(&rho);
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidParameter("kernel vector has zero trace".into()));
    }
    rho.mapv_inplace(|z| z / tr);
    linalg::hermitize_in_place(&mut rho);
    let min = linalg::min_eigenvalue(&rho)?;
    if min < -ZERO_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// The `𝒦₊` eigenvector with eigenvalue within [`ZERO_TOL`] of zero, as a
/// density matrix in the layout's operator space.
pub fn stationary_state(result: &SpectrumResult) -> Result<DensityMatrix> {
    let candidates: Vec<usize> = (0..result.len())
        .filter(|&k| result.sectors[k] == 1 && result.eigenvalues[k].norm() < ZERO_TOL)
        .collect();
    if candidates.len() != 1 {
        return Err(Error::NoKernel { count: candidates.len(), tol: ZERO_TOL });
    }
    let m = result
        .eigenmatrix(candidates[0])
        .ok_or_else(|| Error::InvalidParameter("spectrum computed without eigenvectors".into()))?;
    normalize_state(m)
}

fn sector_positions(parity: &SuperOperatorMatrix, sector: i8) -> Result<Vec<usize>> {
    let signs = parity_diagonal(parity)
        .ok_or_else(|| Error::InvalidParameter("parity superoperator must be diagonal with entries ±1".into()))?;
    Ok((0..signs.len()).filter(|&p| signs[p] == sector).collect())
}

/// Stationary state by a linear solve in `𝒦₊`: one trace-preservation row
/// is replaced by the normalization `Tr ρ = 1`.
pub fn stationary_state_solve(superop: &SuperOperatorMatrix, parity: &SuperOperatorMatrix) -> Result<DensityMatrix> {
    check_same_layout(superop, parity)?;
    let layout = superop.layout();
    let positions = sector_positions(parity, 1)?;
    let basis = HermitianBasis::new(layout, &positions)?;
    let m = superop.matrix();
    let mut real = basis
        .transform(&m, &positions)
        .ok_or_else(|| Error::InvalidParameter("superoperator is not Hermiticity preserving".into()))?;
    let r0 = *basis.diagonal.first().ok_or(Error::NoKernel { count: 0, tol: ZERO_TOL })?;
    real.row_mut(r0).fill(0.0);
    for &r in &basis.diagonal {
        real[[r0, r]] = 1.0;
    }
    let mut rhs = Array1::zeros(basis.dim());
    rhs[r0] = 1.0;
    let x = real.solve_into(rhs).map_err(|e| Error::Eigensolver(format!("stationary solve: {e}")))?;
    let w = x.mapv(|v| c64(v, 0.0));
    let local = basis.lift(w.view());
    let mut full = Array1::zeros(layout.len());
    for (a, &p) in positions.iter().enumerate() {
        full[p] = local[a];
    }
    // residual check: the solve must have produced a kernel vector
    let resid = superop.apply(&full).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if resid > 1e-8 {
        return Err(Error::NoKernel { count: 0, tol: resid });
    }
    normalize_state(layout.reshape(full.view()))
}

/// Real eigenvalue of smallest modulus in one parity sector and its
/// eigenmatrix, by inverse iteration. Intended for the slow tunnelling mode
/// `λ₋,₀` of the broken phase, which is real and isolated near zero.
pub fn slowest_real_mode(
    superop: &SuperOperatorMatrix,
    parity: &SuperOperatorMatrix,
    sector: i8,
) -> Result<(f64, Array2<C64>)> {
    check_same_layout(superop, parity)?;
    let layout = superop.layout();
    let positions = sector_positions(parity, sector)?;
    let basis = HermitianBasis::new(layout, &positions)?;
    let m = superop.matrix();
    let real = basis
        .transform(&m, &positions)
        .ok_or_else(|| Error::InvalidParameter("superoperator is not Hermiticity preserving".into()))?;
    let lu = real.factorize().map_err(|e| Error::Eigensolver(e.to_string()))?;
    let n = basis.dim();
    // deterministic, generic start vector
    let mut x = Array1::from_shape_fn(n, |k| 1.0 + ((k * 7919) % 101) as f64 / 101.0);
    let mut lambda = f64::NAN;
    for _ in 0..200 {
        let y = lu.solve(&x).map_err(|e| Error::Eigensolver(e.to_string()))?;
        let norm = y.dot(&y).sqrt();
        x = y / norm;
        let mx = real.dot(&x);
        let next = x.dot(&mx);
        let resid = (&mx - &(&x * next)).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let converged = (next - lambda).abs() <= 1e-14 * next.abs().max(1e-300) && resid < 1e-10;
        lambda = next;
        if converged {
            let local = basis.lift(x.mapv(|v| c64(v, 0.0)).view());
            let mut full = Array1::zeros(layout.len());
            for (a, &p) in positions.iter().enumerate() {
                full[p] = local[a];
            }
            return Ok((lambda, layout.reshape(full.view())));
        }
    }
    Err(Error::Eigensolver(format!("inverse iteration did not converge (estimate {lambda:e})")))
}

/// A matched `𝒦₊`/`𝒦₋` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub plus: usize,
    pub minus: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PairReport {
    pub pairs: Vec<EigenPair>,
}

impl PairReport {
    /// Pair id per eigenvalue index (`None` if unpaired).
    pub fn ids(&self, len: usize) -> Vec<Option<usize>> {
        let mut ids = vec![None; len];
        for (id, p) in self.pairs.iter().enumerate() {
            ids[p.plus] = Some(id);
            ids[p.minus] = Some(id);
        }
        ids
    }
}

/// Greedy cross-sector matching among the `window` leading reported
/// eigenvalues; pairs with `|λ₊ − λ₋| ≤ tol` are kept.
pub fn detect_pairs(result: &SpectrumResult, tol: f64, window: usize) -> PairReport {
    let leading: Vec<usize> = result.reported().into_iter().take(window).collect();
    let mut candidates = Vec::new();
    for &a in leading.iter().filter(|&&k| result.sectors[k] == 1) {
        for &b in leading.iter().filter(|&&k| result.sectors[k] == -1) {
            candidates.push((a, b, (result.eigenvalues[a] - result.eigenvalues[b]).norm()));
        }
    }
    candidates.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut taken = vec![false; result.len()];
    let mut pairs = Vec::new();
    for (a, b, gap) in candidates {
        if gap > tol || taken[a] || taken[b] {
            continue;
        }
        taken[a] = true;
        taken[b] = true;
        pairs.push(EigenPair { plus: a, minus: b, gap });
    }
    PairReport { pairs }
}

/// Leading eigenvalues per sector for one coupling value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub coupling: f64,
    /// Largest-real-part `𝒦₊` eigenvalue after the stationary one.
    pub lambda_plus_1: C64,
    /// Largest-real-part `𝒦₋` eigenvalue.
    pub lambda_minus_0: C64,
}

/// `λ₊,₁` and `λ₋,₀` from a sector-labelled spectrum.
pub fn leading_modes(result: &SpectrumResult) -> Result<(C64, C64)> {
    let plus = result.sector_indices(1);
    let minus = result.sector_indices(-1);
    if plus.len() < 2 || minus.is_empty() {
        return Err(Error::Eigensolver("spectrum too small to identify λ₊,₁ and λ₋,₀".into()));
    }
    Ok((result.eigenvalues[plus[1]], result.eigenvalues[minus[0]]))
}

/// Restricted-superoperator spectra over a grid of couplings.
pub fn gap_scan(
    template: &ModelParams,
    couplings: &[f64],
    k: usize,
    band: Option<BandLimit>,
) -> Result<Vec<GapRow>> {
    if couplings.is_empty() {
        return Err(Error::InvalidParameter("coupling grid is empty".into()));
    }
    couplings
        .iter()
        .map(|&coupling| {
            let params = template.with_coupling(coupling);
            params.validate()?;
            let (superop, basis) = restricted_superoperator(&params, k, band)?;
            let parity = basis.parity_superoperator(superop.layout());
            let result = diagonalize(&superop, &parity, DiagonalizeOptions::eigenvalues_only())?;
            let (lambda_plus_1, lambda_minus_0) = leading_modes(&result)?;
            Ok(GapRow { coupling, lambda_plus_1, lambda_minus_0 })
        })
        .collect()
}

/// Diagonal of `ρ` in the `S_x` eigenbasis: `(eigenvalue, weight)` pairs with
/// ascending eigenvalues.
pub fn sx_basis_diagonal(rho: &DensityMatrix, spin: Spin) -> Result<Vec<(f64, f64)>> {
    if rho.dim() != spin.dim() {
        return Err(Error::DimensionMismatch { expected: spin.dim(), found: rho.dim() });
    }
    let sx = spin_algebra::spin_operators(spin).x;
    let (vals, w) = linalg::eigh(&sx)?;
    let rw = rho.matrix().dot(&w);
    Ok((0..spin.dim())
        .map(|k| {
            let weight: C64 = (0..spin.dim()).map(|i| w[[i, k]].conj() * rw[[i, k]]).sum();
            (vals[k], weight.re)
        })
        .collect())
}

/// `ρ₊ + cρ₋` with `|c|` as large as positivity allows. The sign of `c` is
/// chosen so that `Tr(A ρ) ≥ 0` for the optional orienting observable `A`;
/// without one `c > 0`.
pub fn symmetry_broken_combination(
    rho_plus: &DensityMatrix,
    rho_minus: &Array2<C64>,
    orient: Option<&Array2<C64>>,
) -> Result<DensityMatrix> {
    let d = rho_plus.dim();
    if rho_minus.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: rho_minus.nrows() });
    }
    let scale = linalg::max_abs(rho_minus);
    if scale == 0.0 {
        return Ok(rho_plus.clone());
    }
    let mut minus = linalg::hermitian_part(rho_minus);
    minus.mapv_inplace(|z| z / scale);
    let tr = linalg::trace(&minus).norm();
    if tr > 1e-8 {
        return Err(Error::NotTraceless(tr));
    }
    let sign = match orient {
        Some(a) => {
            if linalg::trace_product(&minus, a).re >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }
        None => 1.0,
    };
    minus.mapv_inplace(|z| z * sign);
    let plus = rho_plus.matrix();
    let min_eig = |c: f64| linalg::min_eigenvalue(&(plus + &(&minus * c64(c, 0.0))));
    let feasible = |v: f64| v >= -1e-11;
    let mut lo = 0.0;
    if !feasible(min_eig(lo)?) {
        return Err(Error::NotPositive(min_eig(lo)?));
    }
    let mut hi = 1.0;
    while feasible(min_eig(hi)?) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidParameter("combination stays positive for all weights".into()));
        }
    }
    // Bisect on c itself: ρ₊ often has eigenvalues far below any useful
    // stopping threshold on the minimum eigenvalue, which then stays flat
    // until c is close to the boundary.
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(min_eig(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = plus + &(&minus * c64(lo, 0.0));
    linalg::hermitize_in_place(&mut out);
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `exp(−H/T)/Z`.
pub fn gibbs_state(h: &Array2<C64>, temperature: f64) -> Result<DensityMatrix> {
    let (e, v) = linalg::eigh(h)?;
    Ok(gibbs_from_eigh(&e, &v, temperature))
}

fn gibbs_from_eigh(e: &Array1<f64>, v: &Array2<C64>, temperature: f64) -> DensityMatrix {
    let e0 = e[0];
    let mut w = e.mapv(|x| (-(x - e0) / temperature).exp());
    let z = w.sum();
    w /= z;
    let mut vw = v.clone();
    for (mut col, &p) in vw.columns_mut().into_iter().zip(w.iter()) {
        col.mapv_inplace(|x| x * p);
    }
    let mut rho = vw.dot(&linalg::dagger(v));
    linalg::hermitize_in_place(&mut rho);
    DensityMatrix::from_matrix_unchecked(rho)
}

/// Temperature in `[lo, hi]` minimizing the trace distance between `ρ` and
/// the Gibbs state of `h` (golden-section search). Returns the temperature
/// and the distance there.
pub fn best_fit_temperature(rho: &DensityMatrix, h: &Array2<C64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !(0.0 < lo && lo < hi) {
        return Err(Error::InvalidParameter(format!("temperature bracket [{lo}, {hi}] invalid")));
    }
    let (e, v) = linalg::eigh(h)?;
    let dist = |t: f64| -> Result<f64> { rho.trace_distance(&gibbs_from_eigh(&e, &v, t)) };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (dist(c)?, dist(d)?);
    while (b - a) > 1e-7 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = dist(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = dist(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, dist(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmg_model::{lindblad_action, lindblad_superoperator, parity_superoperator};

    fn params(s: f64, lambda: f64, gamma: f64, t: f64) -> ModelParams {
        ModelParams::new(s, lambda, gamma, t).unwrap()
    }

    fn full(p: &ModelParams) -> (SuperOperatorMatrix, SuperOperatorMatrix) {
        (lindblad_superoperator(p, None).unwrap(), parity_superoperator(p.spin))
    }

    #[test]
    fn unitary_spectrum_is_imaginary() {
        let p = params(4.0, 0.8, 0.0, 4.0);
        let (l, adp) = full(&p);
        let r = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        assert!(r.eigenvalues.iter().all(|z| z.re.abs() < 1e-10));
    }

    #[test]
    fn eigenpairs_and_labels() {
        let p = params(3.0, 1.6, 0.3, 2.0);
        let (l, adp) = full(&p);
        let m = l.matrix();
        for opts in [DiagonalizeOptions::default(), DiagonalizeOptions { eigenvectors: true, force_sectors: true }] {
            let r = diagonalize(&l, &adp, opts).unwrap();
            let v = r.eigenvectors.as_ref().unwrap();
            for k in 0..r.len() {
                let col = v.column(k).to_owned();
                let resid = m.dot(&col) - &col * r.eigenvalues[k];
                assert!(resid.iter().all(|z| z.norm() < 1e-9), "eigenpair {k}");
                let pv = adp.apply(&col);
                let sector = f64::from(r.sectors[k]);
                assert!((pv - &col * sector).iter().all(|z| z.norm() < 1e-6));
                assert!(r.eigenvalues[k].re < 1e-8);
            }
            // ordering
            for k in 1..r.len() {
                assert!(r.eigenvalues[k - 1].re >= r.eigenvalues[k].re);
            }
            // conjugation closure
            for z in &r.eigenvalues {
                assert!(r.eigenvalues.iter().any(|w| (w - z.conj()).norm() < 1e-8));
            }
            // exactly one stationary eigenvalue, in 𝒦₊
            let zeros: Vec<_> = (0..r.len()).filter(|&k| r.eigenvalues[k].norm() < 1e-8).collect();
            assert_eq!(zeros.len(), 1);
            assert_eq!(r.sectors[zeros[0]], 1);
        }
    }

    #[test]
    fn complex_fallback_returns_right_eigenvectors() {
        // not Hermiticity preserving, so the real transform is rejected
        let layout = VecLayout::full(2);
        let m = Array2::from_shape_fn((4, 4), |(i, j)| c64((i * 3 + j) as f64 * 0.1, (i as f64 - 2.0 * j as f64) * 0.2));
        let l = SuperOperatorMatrix::dense(layout.clone(), m.clone()).unwrap();
        let adp = SuperOperatorMatrix::diagonal(layout, Array1::from_elem(4, c64(1.0, 0.0))).unwrap();
        let r = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        let v = r.eigenvectors.as_ref().unwrap();
        for k in 0..4 {
            let col = v.column(k).to_owned();
            let resid = m.dot(&col) - &col * r.eigenvalues[k];
            assert!(resid.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn eigenvalue_only_path_matches() {
        let p = params(3.0, 0.6, 0.2, 4.0);
        let (l, adp) = full(&p);
        let a = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        let b = diagonalize(&l, &adp, DiagonalizeOptions::eigenvalues_only()).unwrap();
        assert!(b.eigenvectors.is_none());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-9);
        }
        assert_eq!(a.sectors, b.sectors);
    }

    #[test]
    fn stationary_state_routes_agree() {
        let p = params(4.0, 0.5, 0.3, 2.0);
        let (l, adp) = full(&p);
        let r = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        let rho = stationary_state(&r).unwrap();
        assert!((linalg::trace(rho.matrix()) - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(linalg::max_abs(&lindblad_action(&p, rho.matrix()).unwrap()) < 1e-8);
        let rho2 = stationary_state_solve(&l, &adp).unwrap();
        assert!(rho.trace_distance(&rho2).unwrap() < 1e-9);
        assert!(DensityMatrix::new(rho2.into_inner()).is_ok());
    }

    #[test]
    fn stationary_state_requires_vectors() {
        let p = params(2.0, 0.5, 0.3, 2.0);
        let (l, adp) = full(&p);
        let r = diagonalize(&l, &adp, DiagonalizeOptions::eigenvalues_only()).unwrap();
        assert!(stationary_state(&r).is_err());
    }

    #[test]
    fn pairs_on_duplicated_spectrum() {
        let layout = VecLayout::full(2);
        let vals = vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(-0.5, 1.0), c64(-0.5, 1.0)];
        let r = SpectrumResult { eigenvalues: vals, eigenvectors: None, sectors: vec![1, -1, 1, -1], layout };
        let rep = detect_pairs(&r, 0.0, 12);
        assert_eq!(rep.pairs.len(), 2);
        assert!(rep.pairs.iter().all(|p| p.gap == 0.0));
        assert_eq!(rep.ids(4), vec![Some(0), Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn gap_scan_unitary_and_empty() {
        let p = params(8.0, 0.5, 0.0, 4.0);
        assert!(gap_scan(&p, &[], 9, None).is_err());
        let rows = gap_scan(&p, &[0.3, 2.0], 9, None).unwrap();
        for row in rows {
            assert!(row.lambda_plus_1.re.abs() < 1e-10);
            assert!(row.lambda_minus_0.re.abs() < 1e-10);
        }
    }

    #[test]
    fn sx_diagonal_cases() {
        let spin = Spin::new(3.0).unwrap();
        let d = spin.dim();
        let mixed = sx_basis_diagonal(&DensityMatrix::maximally_mixed(d), spin).unwrap();
        assert!(mixed.iter().all(|(_, w)| (w - 1.0 / d as f64).abs() < 1e-12));
        for k in 1..d {
            assert!(mixed[k].0 > mixed[k - 1].0);
        }
        let sx = spin_algebra::spin_operators(spin).x;
        let (_, w) = linalg::eigh(&sx).unwrap();
        let rho = DensityMatrix::pure(&w.column(5).to_owned());
        let diag = sx_basis_diagonal(&rho, spin).unwrap();
        assert!((diag[5].1 - 1.0).abs() < 1e-12);
        assert!((diag.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_broken_combination_extremal() {
        let p = params(6.0, 2.5, 0.2, 1.0);
        let (l, adp) = full(&p);
        let r = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        let rho = stationary_state(&r).unwrap();
        let minus = r.eigenmatrix(r.sector_indices(-1)[0]).unwrap();
        let sx = spin_algebra::spin_operators(p.spin).x;
        let out = symmetry_broken_combination(&rho, &minus, Some(&sx)).unwrap();
        let min = out.min_eigenvalue().unwrap();
        assert!((-1e-10..=1e-8).contains(&min), "min eigenvalue {min}");
        assert!(out.expectation(&sx).re > 0.0);
        let same = symmetry_broken_combination(&rho, &Array2::zeros((13, 13)), None).unwrap();
        assert_eq!(same.matrix(), rho.matrix());
        let traced = linalg::identity(13);
        assert!(matches!(symmetry_broken_combination(&rho, &traced, None), Err(Error::NotTraceless(_))));
    }

    #[test]
    fn symmetry_broken_combination_with_tiny_populations() {
        // ρ₊ has an eigenvalue far below any stopping threshold; the extremal
        // weight is still 0.3.
        let diag = |v: [f64; 3]| Array2::from_diag(&Array1::from_iter(v.iter().map(|&x| c64(x, 0.0))));
        let rho = DensityMatrix::from_matrix_unchecked(diag([0.7, 0.3 - 1e-12, 1e-12]));
        let out = symmetry_broken_combination(&rho, &diag([1.0, -1.0, 0.0]), None).unwrap();
        assert!((out.matrix()[[0, 0]].re - 1.0).abs() < 1e-10);
        assert!(out.matrix()[[1, 1]].re.abs() < 1e-10);
    }

    #[test]
    fn slow_mode_matches_full_spectrum() {
        let p = params(6.0, 2.5, 0.2, 1.0);
        let (l, adp) = full(&p);
        let r = diagonalize(&l, &adp, DiagonalizeOptions::default()).unwrap();
        let lm0 = r.eigenvalues[r.sector_indices(-1)[0]];
        let (lam, m) = slowest_real_mode(&l, &adp, -1).unwrap();
        assert!((lam - lm0.re).abs() < 1e-10 && lm0.im == 0.0);
        assert!(linalg::trace(&m).norm() < 1e-10);
        let lm = lindblad_action(&p, &m).unwrap();
        assert!(linalg::max_abs(&(lm - &m * c64(lam, 0.0))) < 1e-9);
    }

    #[test]
    fn best_fit_recovers_gibbs_temperature() {
        let p = params(5.0, 0.4, 0.0, 1.0);
        let h = crate::lmg_model::hamiltonian_system(&p);
        let rho = gibbs_state(&h, 0.83).unwrap();
        let (t, dist) = best_fit_temperature(&rho, &h, 0.05, 20.0).unwrap();
        assert!((t - 0.83).abs() < 1e-5, "{t}");
        assert!(dist < 1e-6);
    }
}
