// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time integration of the spin master equation and fits of the recorded
//! observables.
//!
//! The integrator works on the `d × d` density matrix directly and applies
//! the generator through sparse operator products, so the superoperator is
//! never formed.

use ndarray::{Array1, Array2, Zip};
use ndarray_linalg::Solve;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::linalg::{self, c64, C64};
use crate::lmg_model::{hamiltonian_system, ActionWorkspace, DensityMatrix, LindbladGenerator, ModelParams, RestrictedBasis};
use crate::spin_algebra::{self, OperatorMatrix};
use crate::{Error, Result};

/// Relative splitting below which the lowest two `H_S` levels count as a
/// degenerate doublet.
const DOUBLET_TOL: f64 = 1e-9;
/// Maximum allowed `|Tr ρ − 1|` along a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `R_y(θ)|GS⟩`.
    RotatedGround,
    /// `R_y(θ)|S,S⟩`.
    RotatedStretched,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct InitialStateSpec {
    pub kind: InitialKind,
    pub theta: f64,
}

/// Lowest eigenvector of `H_S`. In the broken phase the two lowest levels
/// form a doublet of opposite parity whose splitting can be below rounding;
/// the even member is returned then.
pub fn ground_state(params: &ModelParams) -> Result<Array1<f64>> {
    let k = params.dim().min(2);
    let basis = RestrictedBasis::lowest(params, k)?;
    let mut pick = 0;
    if k == 2 {
        let (e0, e1) = (basis.energies[0], basis.energies[1]);
        if (e1 - e0).abs() <= DOUBLET_TOL * e0.abs().max(1.0) && basis.parities[1] == 1 {
            pick = 1;
        }
    }
    Ok(basis.vectors.column(pick).to_owned())
}

pub fn initial_state(params: &ModelParams, spec: InitialStateSpec) -> Result<DensityMatrix> {
    params.validate()?;
    if !spec.theta.is_finite() {
        return Err(Error::InvalidParameter(format!("rotation angle must be finite, got {}", spec.theta)));
    }
    let d = params.dim();
    let psi0: Array1<C64> = match spec.kind {
        InitialKind::RotatedGround => ground_state(params)?.mapv(|x| c64(x, 0.0)),
        InitialKind::RotatedStretched => {
            let mut v = Array1::zeros(d);
            v[0] = c64(1.0, 0.0);
            v
        }
    };
    let r = spin_algebra::rotation_y(params.spin, spec.theta)?;
    Ok(DensityMatrix::pure(&r.dot(&psi0)))
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub first_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, first_step: None, min_step: 1e-12, max_steps: 10_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince 5(4) tableau. The generator is autonomous, so the nodes c_i
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dρ/dt = 𝓛ρ` with adaptive Dormand-Prince 5(4) steps, landing
/// exactly on every grid time and calling `record(k, t_k, ρ(t_k))`. The
/// Hermitian part is re-imposed after each accepted step.
///
/// `ρ0` must be Hermitian and the grid must start at 0 and be strictly
/// increasing.
pub fn integrate<F>(
    generator: &LindbladGenerator,
    rho0: &Array2<C64>,
    grid: &[f64],
    opts: IntegratorOptions,
    mut record: F,
) -> Result<IntegrationStats>
where
    F: FnMut(usize, f64, &Array2<C64>) -> Result<()>,
{
    let d = generator.dim();
    if rho0.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.nrows() });
    }
    check_grid(grid)?;
    let defect = linalg::hermiticity_defect(rho0);
    if defect > 1e-10 * linalg::max_abs(rho0).max(1.0) {
        return Err(Error::InvalidParameter(format!("initial state is not Hermitian (defect {defect:e})")));
    }
    let mut stats = IntegrationStats::default();
    let mut work = ActionWorkspace::new(d);
    let mut y = rho0.clone();
    let mut k: Vec<Array2<C64>> = (0..7).map(|_| Array2::zeros((d, d))).collect();
    let mut stage = Array2::<C64>::zeros((d, d));
    let mut err = Array2::<C64>::zeros((d, d));
    generator.apply_hermitian_into(&y, &mut k[0], &mut work);
    stats.evaluations += 1;

    let mut t = 0.0;
    let mut h = opts.first_step.unwrap_or_else(|| initial_step(&y, &k[0], opts));
    let mut err_prev = 1e-4_f64;
    record(0, 0.0, &y)?;
    let mut next = 1;
    while next < grid.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let target = grid[next];
        let hits = t + h >= target * (1.0 - 1e-14);
        let step = if hits { target - t } else { h };
        for s in 1..7 {
            combine(&mut stage, Some(&y), step, &A[s][..s], &k);
            generator.apply_hermitian_into(&stage, &mut k[s], &mut work);
        }
        stats.evaluations += 6;
        // stage now holds the fifth-order solution (row 6 of A is the b vector)
        combine(&mut err, None, step, &E, &k);
        let mut norm = 0.0_f64;
        Zip::from(&err).and(&y).and(&stage).for_each(|e, a, b| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            norm = norm.max(e.norm() / sc);
        });
        if !norm.is_finite() {
            norm = 1e10;
        }
        if norm <= 1.0 {
            stats.accepted += 1;
            t = if hits { target } else { t + step };
            std::mem::swap(&mut y, &mut stage);
            linalg::hermitize_in_place(&mut y);
            k.swap(0, 6);
            let tr_err = (linalg::trace(&y) - c64(1.0, 0.0)).norm();
            let tr0 = (linalg::trace(rho0) - c64(1.0, 0.0)).norm();
            if tr_err > TRACE_DRIFT_TOL + tr0 {
                return Err(Error::TraceDrift { t, drift: tr_err });
            }
            if hits {
                record(next, t, &y)?;
                next += 1;
            }
            // PI step control
            let n = norm.max(1e-10);
            let factor = (0.9 * n.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
            err_prev = n;
            // a grid-clipped step says nothing about the natural step size
            if !hits || step >= h {
                h = step * factor;
            }
        } else {
            stats.rejected += 1;
            h = step * (0.9 * norm.powf(-0.2)).max(0.2);
        }
        if h < opts.min_step {
            return Err(Error::StepSizeUnderflow { t, h });
        }
    }
    Ok(stats)
}

/// `out = base + h Σ_j coeffs[j] k[j]` in a single pass.
fn combine(out: &mut Array2<C64>, base: Option<&Array2<C64>>, h: f64, coeffs: &[f64], k: &[Array2<C64>]) {
    let terms: Vec<(f64, &[C64])> = coeffs
        .iter()
        .zip(k)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, kj)| (h * c, kj.as_slice().expect("standard layout")))
        .collect();
    let dst = out.as_slice_mut().expect("standard layout");
    match base {
        Some(b) => dst.copy_from_slice(b.as_slice().expect("standard layout")),
        None => dst.fill(c64(0.0, 0.0)),
    }
    const CHUNK: usize = 1024;
    for (start, chunk) in (0..).step_by(CHUNK).zip(dst.chunks_mut(CHUNK)) {
        for &(c, kj) in &terms {
            for (d, v) in chunk.iter_mut().zip(&kj[start..]) {
                *d += v * c;
            }
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing and finite".into()));
    }
    Ok(())
}

fn initial_step(y: &Array2<C64>, f: &Array2<C64>, opts: IntegratorOptions) -> f64 {
    let scale = |a: &C64, b: f64| a.norm() / (opts.atol + opts.rtol * b);
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    Zip::from(y).and(f).for_each(|a, b| {
        d0 = d0.max(scale(a, a.norm()));
        d1 = d1.max(scale(b, a.norm()));
    });
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(1.0)
    }
}

/// Observables recorded along a spin trajectory.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
    /// `⟨H_S⟩`.
    pub energy: Vec<f64>,
    /// `|Tr ρ − 1|`.
    pub trace_err: Vec<f64>,
    /// Smallest eigenvalue of `ρ`, when requested.
    pub min_eig: Vec<Option<f64>>,
    pub purity: Vec<f64>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_trace_err(&self) -> f64 {
        self.trace_err.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Smallest recorded eigenvalue over the run, if any were recorded.
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.min_eig.iter().flatten().copied().reduce(f64::min)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub integrator: IntegratorOptions,
    /// Diagonalize `ρ` at every grid point (`O(d³)` each).
    pub min_eig: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { integrator: IntegratorOptions::default(), min_eig: true }
    }
}

/// Evolves `ρ0` under the spin Lindbladian of `params` and records
/// `⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩, ⟨H_S⟩` on `grid`.
pub fn evolve(params: &ModelParams, rho0: &DensityMatrix, grid: &[f64], opts: EvolveOptions) -> Result<Trajectory> {
    let (traj, _) = evolve_with_final(params, rho0, grid, opts)?;
    Ok(traj)
}

/// As [`evolve`], also returning `ρ` at the last grid time.
pub fn evolve_with_final(
    params: &ModelParams,
    rho0: &DensityMatrix,
    grid: &[f64],
    opts: EvolveOptions,
) -> Result<(Trajectory, DensityMatrix)> {
    let generator = LindbladGenerator::spin_model(params)?;
    if rho0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch { expected: generator.dim(), found: rho0.dim() });
    }
    let ops = spin_algebra::spin_operators(params.spin);
    let h: OperatorMatrix = hamiltonian_system(params);
    let mut traj = Trajectory::default();
    let mut last = rho0.matrix().clone();
    traj.stats = integrate(&generator, rho0.matrix(), grid, opts.integrator, |_, t, rho| {
        let ev = |a: &OperatorMatrix| linalg::trace_product(a, rho).re;
        traj.times.push(t);
        traj.sx.push(ev(&ops.x));
        traj.sy.push(ev(&ops.y));
        traj.sz.push(ev(&ops.z));
        traj.energy.push(ev(&h));
        traj.trace_err.push((linalg::trace(rho) - c64(1.0, 0.0)).norm());
        traj.purity.push(rho.iter().map(|z| z.norm_sqr()).sum());
        traj.min_eig.push(if opts.min_eig { Some(linalg::min_eigenvalue(rho)?) } else { None });
        if t == *grid.last().expect("non-empty") {
            last.assign(rho);
        }
        Ok(())
    })?;
    Ok((traj, DensityMatrix::from_matrix_unchecked(last)))
}

/// `A e^{−κt} cos(ωt + φ)` fitted to a sampled channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampedFit {
    pub frequency: f64,
    pub decay: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// The signal has no resolvable oscillation; frequency and decay are not
    /// meaningful.
    pub low_amplitude: bool,
}

const FIT_MAX_ITER: usize = 500;

/// Least-squares fit of `A e^{−κt} cos(ωt + φ)`. The start point is the FFT
/// peak for `ω`, the log-envelope slope for `κ`, and a linear solve for `A, φ`;
/// Levenberg-Marquardt refines all four.
pub fn fit_damped_oscillation(times: &[f64], values: &[f64]) -> Result<DampedFit> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::DimensionMismatch { expected: n, found: values.len() });
    }
    if n < 40 {
        return Err(Error::InvalidParameter(format!("need at least 40 samples, got {n}")));
    }
    let span = times[n - 1] - times[0];
    let dt = span / (n - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::InvalidParameter("fit needs a uniform, increasing time grid".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let spread = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if spread <= 1e-9 * scale.max(1e-300) || scale == 0.0 {
        let residual = (values.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        return Ok(DampedFit { frequency: 0.0, decay: 0.0, amplitude: 0.0, phase: 0.0, residual, low_amplitude: true });
    }

    let t0 = times[0];
    let ts: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let omega0 = fft_peak(values, dt);
    let kappa0 = envelope_slope(&ts, values);
    let (amp0, phase0) = linear_amplitude(&ts, values, omega0, kappa0);
    let mut p = [amp0, kappa0, omega0, phase0];
    let cost = |p: &[f64; 4]| -> f64 {
        ts.iter().zip(values).map(|(&t, &y)| (model(p, t) - y).powi(2)).sum()
    };
    let mut c = cost(&p);
    let mut mu = 1e-3;
    let mut converged = false;
    for _ in 0..FIT_MAX_ITER {
        // normal equations JᵀJ δ = −Jᵀr
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&t, &y) in ts.iter().zip(values) {
            let env = (-p[1] * t).exp();
            let arg = p[2] * t + p[3];
            let (s, co) = arg.sin_cos();
            let r = p[0] * env * co - y;
            let g = [env * co, -t * p[0] * env * co, -t * p[0] * env * s, -p[0] * env * s];
            for a in 0..4 {
                jtr[a] += g[a] * r;
                for b in 0..4 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut m = Array2::<f64>::zeros((4, 4));
            for a in 0..4 {
                for b in 0..4 {
                    m[[a, b]] = jtj[a][b];
                }
                m[[a, a]] += mu * jtj[a][a].max(1e-300);
            }
            let rhs = Array1::from_iter(jtr.iter().map(|v| -v));
            let Ok(delta) = m.solve_into(rhs) else {
                mu *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3]];
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                let small = delta.iter().zip(trial.iter()).all(|(d, v)| d.abs() <= 1e-13 * v.abs().max(1e-8));
                let rel = (c - ct) / c.max(1e-300);
                p = trial;
                c = ct;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if small || rel < 1e-16 || c < 1e-28 * scale * scale * n as f64 {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if converged || !improved {
            converged = true;
            break;
        }
    }
    let residual = (c / n as f64).sqrt();
    if !converged {
        return Err(Error::FitNonConvergence { iterations: FIT_MAX_ITER, residual });
    }
    let [mut amp, kappa, mut omega, mut phase] = p;
    // canonical form: A ≥ 0, ω ≥ 0, φ ∈ (−π, π]
    if omega < 0.0 {
        omega = -omega;
        phase = -phase;
    }
    if amp < 0.0 {
        amp = -amp;
        phase += std::f64::consts::PI;
    }
    phase = phase.sin().atan2(phase.cos());
    if omega * span / (2.0 * std::f64::consts::PI) < 3.0 {
        return Err(Error::InvalidParameter("signal spans fewer than 3 periods".into()));
    }
    let low_amplitude = amp <= 1e-9 * scale;
    Ok(DampedFit { frequency: omega, decay: kappa, amplitude: amp, phase, residual, low_amplitude })
}

fn model(p: &[f64; 4], t: f64) -> f64 {
    p[0] * (-p[1] * t).exp() * (p[2] * t + p[3]).cos()
}

/// Angular frequency of the largest spectral peak, with parabolic
/// interpolation on an 8× zero-padded transform.
fn fft_peak(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    let len = (8 * n).next_power_of_two();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = values.iter().map(|v| c64(v - mean, 0.0)).collect();
    buf.resize(len, c64(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();
    let k = (1..mag.len()).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap_or(1);
    let mut shift = 0.0;
    if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let den = a - 2.0 * b + c;
        if den != 0.0 {
            shift = 0.5 * (a - c) / den;
        }
    }
    2.0 * std::f64::consts::PI * (k as f64 + shift) / (len as f64 * dt)
}

/// Decay rate from a straight-line fit of `ln|y|` at the local maxima of `|y|`.
fn envelope_slope(ts: &[f64], values: &[f64]) -> f64 {
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let peaks: Vec<(f64, f64)> = (1..abs.len() - 1)
        .filter(|&i| abs[i] >= abs[i - 1] && abs[i] > abs[i + 1] && abs[i] > 0.0)
        .map(|i| (ts[i], abs[i].ln()))
        .collect();
    if peaks.len() < 2 {
        return 0.0;
    }
    let m = peaks.len() as f64;
    let (st, sy) = peaks.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mt, my) = (st / m, sy / m);
    let (num, den) = peaks.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mt) * (p.1 - my), b + (p.0 - mt).powi(2)));
    if den == 0.0 {
        0.0
    } else {
        -num / den
    }
}

/// `A, φ` minimizing the residual for fixed `ω, κ`.
fn linear_amplitude(ts: &[f64], values: &[f64], omega: f64, kappa: f64) -> (f64, f64) {
    // y ≈ a·e^{−κt}cos ωt + b·e^{−κt}sin ωt
    let (mut cc, mut cs, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in ts.iter().zip(values) {
        let env = (-kappa * t).exp();
        let (s, c) = (omega * t).sin_cos();
        let (c, s) = (env * c, env * s);
        cc += c * c;
        cs += c * s;
        ss += s * s;
        yc += y * c;
        ys += y * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-300 {
        return (values[0], 0.0);
    }
    let a = (yc * ss - ys * cs) / det;
    let b = (ys * cc - yc * cs) / det;
    // a cos + b sin = A cos(ωt + φ) with A cos φ = a, −A sin φ = b
    ((a * a + b * b).sqrt(), (-b).atan2(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmg_model::{lindblad_superoperator, parity_superoperator};
    use crate::spectral::stationary_state_solve;
    use approx::assert_abs_diff_eq;

    fn params(s: f64, lambda: f64, gamma: f64, t: f64) -> ModelParams {
        ModelParams::new(s, lambda, gamma, t).unwrap()
    }

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn stretched_state_at_zero_angle() {
        let p = params(5.0, 0.0, 0.1, 1.0);
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: 0.0 }).unwrap();
        assert_eq!(rho.matrix()[[0, 0]], c64(1.0, 0.0));
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        assert!(initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: f64::NAN }).is_err());
    }

    #[test]
    fn stretched_state_direction() {
        let p = params(7.5, 2.0, 0.1, 1.0);
        let theta0 = std::f64::consts::FRAC_PI_3;
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: theta0 }).unwrap();
        let ops = spin_algebra::spin_operators(p.spin);
        let s = p.s();
        assert_abs_diff_eq!(rho.expectation(&ops.x).re, s * theta0.sin(), epsilon = 1e-10);
        assert_abs_diff_eq!(rho.expectation(&ops.y).re, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.expectation(&ops.z).re, s * theta0.cos(), epsilon = 1e-10);
    }

    #[test]
    fn broken_phase_ground_is_even() {
        let p = params(40.0, 3.0, 0.1, 1.0);
        let gs = ground_state(&p).unwrap();
        for (k, x) in gs.iter().enumerate() {
            if k % 2 == 1 {
                assert!(x.abs() < 1e-14);
            }
        }
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedGround, theta: 0.0 }).unwrap();
        let sx = spin_algebra::spin_operators(p.spin).x;
        assert!(rho.expectation(&sx).re.abs() < 1e-10);
    }

    #[test]
    fn unitary_ground_state_is_stationary() {
        let p = params(10.0, 0.5, 0.0, 1.0);
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedGround, theta: 0.0 }).unwrap();
        let traj = evolve(&p, &rho, &grid(5.0, 11), EvolveOptions::default()).unwrap();
        for series in [&traj.sx, &traj.sy, &traj.sz, &traj.energy] {
            for v in series.iter() {
                assert!((v - series[0]).abs() < 1e-8);
            }
        }
        assert!(traj.max_trace_err() < 1e-12);
    }

    #[test]
    fn invariants_and_long_time_limit() {
        let p = params(4.0, 0.5, 0.5, 2.0);
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: 0.7 }).unwrap();
        // m_z = 1 in the symmetric phase: t = 20/(γ/2)
        let g = grid(80.0, 41);
        let (traj, last) = evolve_with_final(&p, &rho, &g, EvolveOptions::default()).unwrap();
        assert!(traj.max_trace_err() < 1e-8);
        assert!(traj.min_eigenvalue().unwrap() >= -1e-8);
        assert!(linalg::hermiticity_defect(last.matrix()) < 1e-14);
        let l = lindblad_superoperator(&p, None).unwrap();
        let ss = stationary_state_solve(&l, &parity_superoperator(p.spin)).unwrap();
        assert!(last.trace_distance(&ss).unwrap() < 1e-4);
    }

    #[test]
    fn tolerance_halving_converges() {
        let p = params(6.0, 0.5, 0.2, 4.0);
        let rho = initial_state(&p, InitialStateSpec { kind: InitialKind::RotatedStretched, theta: 0.4 }).unwrap();
        let g = grid(10.0, 21);
        let run = |rtol: f64, atol: f64| {
            let opts = EvolveOptions { integrator: IntegratorOptions { rtol, atol, ..Default::default() }, min_eig: false };
            evolve(&p, &rho, &g, opts).unwrap()
        };
        let a = run(1e-8, 1e-10);
        let b = run(5e-9, 5e-11);
        for (x, y) in a.sx.iter().zip(&b.sx).chain(a.energy.iter().zip(&b.energy)) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_validation() {
        let p = params(1.0, 0.5, 0.2, 4.0);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(evolve(&p, &rho, &[0.5, 1.0], EvolveOptions::default()).is_err());
        assert!(evolve(&p, &rho, &[0.0, 1.0, 1.0], EvolveOptions::default()).is_err());
        assert!(evolve(&p, &DensityMatrix::maximally_mixed(4), &[0.0], EvolveOptions::default()).is_err());
    }

    #[test]
    fn underflow_is_reported() {
        let p = params(2.0, 0.5, 0.2, 4.0);
        let generator = LindbladGenerator::spin_model(&p).unwrap();
        let rho = DensityMatrix::maximally_mixed(5);
        let opts = IntegratorOptions { rtol: 1e-30, atol: 1e-30, min_step: 1e-3, ..Default::default() };
        let r = integrate(&generator, rho.matrix(), &[0.0, 1.0], opts, |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }

    #[test]
    fn synthetic_fit() {
        let ts = grid(30.0, 601);
        let ys: Vec<f64> = ts.iter().map(|t| (-0.1 * t).exp() * (2.0 * t).cos()).collect();
        let f = fit_damped_oscillation(&ts, &ys).unwrap();
        assert_abs_diff_eq!(f.frequency, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.decay, 0.1, epsilon = 1e-6);
        assert_abs_diff_eq!(f.amplitude, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.phase, 0.0, epsilon = 1e-6);
        assert!(!f.low_amplitude);
        let ys: Vec<f64> = ts.iter().map(|t| 0.3 * (-0.02 * t).exp() * (0.9 * t + 1.1).cos()).collect();
        let f = fit_damped_oscillation(&ts, &ys).unwrap();
        assert_abs_diff_eq!(f.frequency, 0.9, epsilon = 1e-6);
        assert_abs_diff_eq!(f.phase, 1.1, epsilon = 1e-6);
    }

    #[test]
    fn constant_signal_is_flagged() {
        let ts = grid(30.0, 100);
        let f = fit_damped_oscillation(&ts, &vec![0.25; 100]).unwrap();
        assert!(f.low_amplitude);
        assert_eq!(f.amplitude, 0.0);
        assert!(fit_damped_oscillation(&ts[..20], &[0.0; 20]).is_err());
    }
}
