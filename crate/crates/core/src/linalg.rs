// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex helpers shared by the model, the oracle and the
//! integrator. Decompositions go through LAPACK (`ndarray-linalg`).

use ndarray::{s, Array1, Array2, ArrayView2, Zip};
use ndarray_linalg::{Eigh, EigValsh, UPLO};
use num_complex::Complex64;

use std::os::raw::{c_char, c_int};

use crate::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|x| c64(x, 0.0))
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, c64(1.0, 0.0))
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[[i, k]] * b[[k, i]];
        }
    }
    acc
}

pub fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) + b.dot(a)
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: &Array2<C64>) -> Array2<C64> {
    let mut out = a.clone();
    hermitize_in_place(&mut out);
    out
}

pub fn hermitize_in_place(a: &mut Array2<C64>) {
    let n = a.nrows();
    let fix = |a: &mut Array2<C64>, i: usize, j: usize| {
        if i == j {
            a[[i, i]].im = 0.0;
        } else if i < j {
            let avg = (a[[i, j]] + a[[j, i]].conj()) * 0.5;
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    };
    for ib in (0..n).step_by(TILE) {
        for jb in (ib..n).step_by(TILE) {
            for i in ib..(ib + TILE).min(n) {
                for j in jb..(jb + TILE).min(n) {
                    fix(a, i, j);
                }
            }
        }
    }
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == c64(0.0, 0.0) {
                continue;
            }
            out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .zip_mut_with(b, |o, &x| *o = aij * x);
        }
    }
    out
}

/// Column-major copy. ndarray-linalg hands row-major matrices to LAPACK as
/// their transpose; routines whose result depends on that get this instead.
pub fn column_major<A: Clone>(a: &Array2<A>) -> Array2<A> {
    a.t().as_standard_layout().into_owned().reversed_axes()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    // A row-major input would be diagonalized as its transpose, i.e. its
    // conjugate, giving conjugated eigenvectors.
    Ok(column_major(a).eigh(UPLO::Lower)?)
}

pub fn eigvalsh(a: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(a.eigvalsh(UPLO::Lower)?)
}

pub fn eigh_real(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    Ok(a.eigh(UPLO::Lower)?)
}

pub fn min_eigenvalue(a: &Array2<C64>) -> Result<f64> {
    let h = hermitian_part(a);
    Ok(eigvalsh(&h)?[0])
}

/// `½‖A − B‖₁` for Hermitian arguments.
pub fn trace_distance(a: &Array2<C64>, b: &Array2<C64>) -> Result<f64> {
    let diff = hermitian_part(&(a - b));
    Ok(0.5 * eigvalsh(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// `exp(−i·t·H)` for Hermitian `H`.
pub fn unitary_exp(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (w, v) = eigh(h)?;
    let phases = w.mapv(|e| C64::from_polar(1.0, -e * t));
    let mut vp = v.clone();
    Zip::from(vp.columns_mut()).and(&phases).for_each(|mut col, &p| col *= p);
    Ok(vp.dot(&dagger(&v)))
}

/// The `k` lowest eigenpairs of the real symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off` (LAPACK `dstevr`). Eigenvectors are
/// returned as columns.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], k: usize) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = diag.len();
    if k == 0 || k > n || off.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal eigenproblem: n = {n}, off-diagonal length {}, k = {k}",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    // dstevr wants an off-diagonal buffer of length n
    let mut e = off.to_vec();
    e.push(0.0);
    let (n_i, il, iu) = (n as c_int, 1 as c_int, k as c_int);
    let (vl, vu, abstol) = (0.0, 0.0, 0.0);
    let mut m: c_int = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n * k];
    let ldz = n as c_int;
    let mut isuppz = vec![0 as c_int; 2 * n];
    let lwork = (20 * n) as c_int;
    let mut work = vec![0.0; 20 * n];
    let liwork = (10 * n) as c_int;
    let mut iwork = vec![0 as c_int; 10 * n];
    let mut info: c_int = 0;
    let jobz = b'V' as c_char;
    let range = if k == n { b'A' } else { b'I' } as c_char;
    // SAFETY: every buffer is sized per the LAPACK documentation for dstevr
    // with RANGE = 'I' or 'A' and JOBZ = 'V' (Z holds n × k when k < n).
    unsafe {
        lapack_sys::dstevr_(
            &jobz, &range, &n_i, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu, &abstol, &mut m,
            w.as_mut_ptr(), z.as_mut_ptr(), &ldz, isuppz.as_mut_ptr(), work.as_mut_ptr(), &lwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 || m as usize != k {
        return Err(Error::Eigensolver(format!("dstevr failed: info = {info}, found {m} of {k}")));
    }
    w.truncate(k);
    // column-major n × k
    let vecs = Array2::from_shape_vec((k, n), z)
        .expect("buffer is n·k")
        .reversed_axes();
    Ok((Array1::from(w), vecs.as_standard_layout().to_owned()))
}

/// Row-wise sparse form of a dense operator, used where the same operator is
/// applied many times (the integrator's right-hand side). Exact zeros are
/// dropped, so banded spin operators cost `O(d²·bandwidth)` per product.
#[derive(Clone, Debug)]
pub struct SparseRows {
    n: usize,
    rows: Vec<Vec<(usize, C64)>>,
    /// `rows` with conjugated entries, for products with the adjoint.
    conj_rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    pub fn from_dense(a: &Array2<C64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let rows = a
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, z)| **z != c64(0.0, 0.0))
                    .map(|(k, z)| (k, *z))
                    .collect()
            })
            .collect::<Vec<Vec<(usize, C64)>>>();
        let conj_rows = rows.iter().map(|r| r.iter().map(|&(k, z)| (k, z.conj())).collect()).collect();
        Self { n: a.nrows(), rows, conj_rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `out = self · x` (overwrites `out`).
    pub fn mul_into(&self, x: ArrayView2<C64>, out: &mut Array2<C64>) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut dst = out.row_mut(i);
            dst.fill(c64(0.0, 0.0));
            for &(k, a) in row {
                dst.scaled_add(a, &x.row(k));
            }
        }
    }

    /// `out = x · self†` (overwrites `out`), without forming `self†`.
    pub fn mul_adjoint_right_into(&self, x: ArrayView2<C64>, out: &mut Array2<C64>) {
        let (n, conj) = (self.n, &self.conj_rows);
        match (x.as_slice(), out.as_slice_mut()) {
            (Some(xs), Some(os)) => {
                for (xr, dst) in xs.chunks_exact(n).zip(os.chunks_exact_mut(n)) {
                    for (d, row) in dst.iter_mut().zip(conj) {
                        *d = row.iter().map(|&(k, a)| xr[k] * a).sum();
                    }
                }
            }
            _ => {
                for (xr, mut dst) in x.rows().into_iter().zip(out.rows_mut()) {
                    for (d, row) in dst.iter_mut().zip(conj) {
                        *d = row.iter().map(|&(k, a)| xr[k] * a).sum();
                    }
                }
            }
        }
    }
}

const TILE: usize = 32;

/// Calls `f(i, j)` over `0..n × 0..n` in cache-sized tiles.
fn tiled(n: usize, mut f: impl FnMut(usize, usize)) {
    for ib in (0..n).step_by(TILE) {
        for jb in (0..n).step_by(TILE) {
            for i in ib..(ib + TILE).min(n) {
                for j in jb..(jb + TILE).min(n) {
                    f(i, j);
                }
            }
        }
    }
}

/// Overwrites `out` with `x†`.
pub fn dagger_into(x: &Array2<C64>, out: &mut Array2<C64>) {
    let n = x.nrows();
    match (x.as_slice(), out.as_slice_mut()) {
        (Some(xs), Some(os)) => tiled(n, |i, j| os[i * n + j] = xs[j * n + i].conj()),
        _ => tiled(n, |i, j| out[[i, j]] = x[[j, i]].conj()),
    }
}

/// Overwrites `out` with `x + x†`.
pub fn hermitian_sum_into(x: &Array2<C64>, out: &mut Array2<C64>) {
    let n = x.nrows();
    match (x.as_slice(), out.as_slice_mut()) {
        (Some(xs), Some(os)) => tiled(n, |i, j| os[i * n + j] = xs[i * n + j] + xs[j * n + i].conj()),
        _ => tiled(n, |i, j| out[[i, j]] = x[[i, j]] + x[[j, i]].conj()),
    }
}
