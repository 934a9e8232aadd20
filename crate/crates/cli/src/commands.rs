// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use anyhow::bail;
use lmg_core::bosonic_oracle::{self, BosonParams, OracleModel};
use lmg_core::dynamics::{self, EvolveOptions, InitialStateSpec, IntegratorOptions, TRACE_DRIFT_TOL};
use lmg_core::hp_analytic::{self, HpParams, Quench};
use lmg_core::lmg_model::{self, RestrictedBasis};
use lmg_core::spectral::{self, DiagonalizeOptions, ZERO_TOL};
use lmg_core::{linalg, spin_algebra, third_quantization, DensityMatrix, ModelParams, SuperOperatorMatrix, C64};
use ndarray::Array2;
use serde_json::json;

use crate::config::{
    AnalyticConfig, DynamicsConfig, GapScanConfig, OracleConfig, SpectrumConfig, StationaryConfig,
};
use crate::report::{num, write_csv, Check, Report};

/// Largest `vec(𝟙)` left residual accepted on an assembled superoperator.
pub const LEFT_IDENTITY_TOL: f64 = 1e-10;
/// Negative eigenvalues down to this are accepted on integrated states.
pub const DYNAMICS_POSITIVITY_TOL: f64 = 1e-8;
/// Agreement required between independent evaluations of the `B±` identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// A superoperator, its parity superoperator and, if restricted, the basis
/// its operators live in.
struct Assembled {
    superop: SuperOperatorMatrix,
    parity: SuperOperatorMatrix,
    basis: Option<RestrictedBasis>,
}

impl Assembled {
    fn new(
        params: &ModelParams,
        k: Option<usize>,
        band: Option<lmg_model::BandLimit>,
        budget: usize,
    ) -> anyhow::Result<Self> {
        match k {
            Some(k) => {
                let (superop, basis) = lmg_model::restricted_superoperator(params, k, band)?;
                let parity = basis.parity_superoperator(superop.layout());
                Ok(Self { superop, parity, basis: Some(basis) })
            }
            None => {
                if band.is_some() {
                    bail!("band_window applies to the restricted superoperator only; set K as well");
                }
                let superop = lmg_model::lindblad_superoperator(params, Some(budget))?;
                Ok(Self { superop, parity: lmg_model::parity_superoperator(params.spin), basis: None })
            }
        }
    }

    /// Maps an operator on the kept states back to the full space.
    fn lift(&self, m: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Some(b) => b.lift(m),
            None => m.clone(),
        }
    }

    fn left_identity_check(&self) -> Check {
        Check::bound("left_identity", self.superop.identity_left_residual(), LEFT_IDENTITY_TOL)
    }
}

fn c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn spectrum(cfg: &SpectrumConfig, out: &Path) -> anyhow::Result<Report> {
    let params = cfg.params()?;
    let a = Assembled::new(&params, cfg.k, cfg.band()?, cfg.budget)?;
    let result = spectral::diagonalize(&a.superop, &a.parity, DiagonalizeOptions::eigenvalues_only())?;
    let pairs = spectral::detect_pairs(&result, cfg.pair_tol, cfg.pair_window);
    let ids = pairs.ids(result.len());
    let reported = result.reported();
    let rows = reported.iter().map(|&k| {
        let z = result.eigenvalues[k];
        let id = ids[k].map_or(-1, |i| i as i64);
        vec![num(z.re), num(z.im), result.sectors[k].to_string(), id.to_string()]
    });
    let path = write_csv(out, "spectrum.csv", &["re", "im", "sector", "pair_id"], rows)?;
    let lead = result.eigenvalues.first().copied().unwrap_or(C64::new(f64::NAN, f64::NAN));
    let pair_json: Vec<_> = pairs
        .pairs
        .iter()
        .enumerate()
        .map(|(id, p)| {
            json!({
                "pair_id": id,
                "gap": p.gap,
                "plus": c(result.eigenvalues[p.plus]),
                "minus": c(result.eigenvalues[p.minus]),
            })
        })
        .collect();
    Ok(Report {
        outputs: vec![path],
        checks: vec![a.left_identity_check(), Check::bound("stationary_eigenvalue", lead.norm(), ZERO_TOL)],
        summary: json!({
            "superoperator_dim": a.superop.dim(),
            "eigenvalues": result.len(),
            "reported": reported.len(),
            "pairs": pair_json,
        }),
    })
}

pub fn gap_scan(cfg: &GapScanConfig, out: &Path) -> anyhow::Result<Report> {
    let template = cfg.template()?;
    let rows = spectral::gap_scan(&template, &cfg.lambdas, cfg.k, cfg.band()?)?;
    let leading = rows.iter().map(|r| r.lambda_plus_1.re.max(r.lambda_minus_0.re)).fold(f64::NEG_INFINITY, f64::max);
    let csv_rows = rows.iter().map(|r| {
        vec![num(r.coupling), num(r.lambda_plus_1.re), num(r.lambda_minus_0.re), num(r.lambda_minus_0.im)]
    });
    let path = write_csv(out, "gap_scan.csv", &["lambda_coupling", "re_lp1", "re_lm0", "im_lm0"], csv_rows)?;
    Ok(Report {
        outputs: vec![path],
        checks: vec![Check::bound("nonpositive_real_parts", leading.max(0.0), ZERO_TOL)],
        summary: json!({ "points": rows.len() }),
    })
}

fn state_checks(prefix: &str, rho: &DensityMatrix) -> anyhow::Result<Vec<Check>> {
    let m = rho.matrix();
    Ok(vec![
        Check::bound(&format!("{prefix}_trace"), (linalg::trace(m) - 1.0).norm(), DensityMatrix::TRACE_TOL),
        Check::bound(&format!("{prefix}_hermiticity"), linalg::hermiticity_defect(m), DensityMatrix::HERMITIAN_TOL),
        Check::positivity(&format!("{prefix}_positivity"), rho.min_eigenvalue()?, DensityMatrix::POSITIVITY_TOL),
    ])
}

fn sx_rows(rho: &DensityMatrix, params: &ModelParams) -> anyhow::Result<Vec<Vec<String>>> {
    Ok(spectral::sx_basis_diagonal(rho, params.spin)?.into_iter().map(|(m, w)| vec![num(m), num(w)]).collect())
}

pub fn stationary(cfg: &StationaryConfig, out: &Path) -> anyhow::Result<Report> {
    let params = cfg.params()?;
    let a = Assembled::new(&params, cfg.k, cfg.band()?, cfg.budget)?;
    let local = spectral::stationary_state_solve(&a.superop, &a.parity)?;
    let rho = DensityMatrix::from_matrix_unchecked(a.lift(local.matrix()));
    let mut checks = vec![a.left_identity_check()];
    checks.extend(state_checks("stationary", &rho)?);
    let sx = spin_algebra::spin_operators(params.spin).x;
    let s = params.s();
    let mut outputs = vec![write_csv(out, "stationary.csv", &["sx", "weight"], sx_rows(&rho, &params)?)?];
    let mut summary = json!({
        "superoperator_dim": a.superop.dim(),
        "mx": rho.expectation(&sx).re / s,
        "purity": rho.purity(),
    });
    if cfg.symmetry_broken {
        let (lambda_minus_0, minus) = spectral::slowest_real_mode(&a.superop, &a.parity, -1)?;
        let broken = spectral::symmetry_broken_combination(&rho, &a.lift(&minus), Some(&sx))?;
        checks.extend(state_checks("broken", &broken)?);
        outputs.push(write_csv(out, "stationary_broken.csv", &["sx", "weight"], sx_rows(&broken, &params)?)?);
        summary["lambda_minus_0"] = json!(lambda_minus_0);
        summary["broken_mx"] = json!(broken.expectation(&sx).re / s);
    }
    Ok(Report { outputs, checks, summary })
}

/// Closed-form observables on `grid`: `[mx, my, mz, energy, energy_no_fs, T_S]`.
fn analytic_rows(quench: &Quench, grid: &[f64]) -> anyhow::Result<Vec<Vec<String>>> {
    grid.iter()
        .map(|&t| {
            let m = hp_analytic::magnetization_hp(quench, t)?;
            let e = hp_analytic::energy_expectation_hp(quench, t)?;
            let ts = hp_analytic::time_dependent_temperature(quench, t)?;
            Ok([t, m[0], m[1], m[2], e.with_finite_size, e.without_finite_size, ts].iter().map(|&x| num(x)).collect())
        })
        .collect()
}

const ANALYTIC_HEADER: [&str; 7] = ["t", "mx", "my", "mz", "energy", "energy_no_fs", "T_S"];

pub fn dynamics(cfg: &DynamicsConfig, out: &Path) -> anyhow::Result<Report> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let theta = cfg.absolute_theta()?;
    // the closed forms are checked first so an unsupported regime fails fast
    let analytic = if cfg.analytic {
        let quench = Quench { coupling: cfg.lambda, temperature: cfg.t, dissipation: cfg.gamma, theta, spin: cfg.s };
        Some(analytic_rows(&quench, &grid)?)
    } else {
        None
    };
    let rho0 = dynamics::initial_state(&params, InitialStateSpec { kind: cfg.initial, theta })?;
    let opts = EvolveOptions {
        integrator: IntegratorOptions { rtol: cfg.rtol, atol: cfg.atol, ..IntegratorOptions::default() },
        min_eig: cfg.min_eig,
    };
    let traj = dynamics::evolve(&params, &rho0, &grid, opts)?;
    let rows = (0..traj.len()).map(|k| {
        let min_eig = traj.min_eig[k].unwrap_or(f64::NAN);
        [traj.times[k], traj.sx[k], traj.sy[k], traj.sz[k], traj.energy[k], traj.trace_err[k], min_eig]
            .iter()
            .map(|&x| num(x))
            .collect()
    });
    let header = ["t", "sx", "sy", "sz", "energy", "trace_err", "min_eig"];
    let mut outputs = vec![write_csv(out, "dynamics.csv", &header, rows)?];
    if let Some(rows) = analytic {
        outputs.push(write_csv(out, "analytic.csv", &ANALYTIC_HEADER, rows)?);
    }
    let mut checks = vec![Check::bound("trajectory_trace", traj.max_trace_err(), TRACE_DRIFT_TOL)];
    checks.push(match traj.min_eigenvalue() {
        Some(v) => Check::positivity("trajectory_positivity", v, DYNAMICS_POSITIVITY_TOL),
        None => Check::skipped("trajectory_positivity", "min_eig recording disabled"),
    });
    Ok(Report {
        outputs,
        checks,
        summary: json!({ "theta": theta, "integrator": traj.stats }),
    })
}

/// `B₋² − B₊² = m_z`, `B₊/B₋ = (4T − ω_b)/(4T + ω_b)`, and agreement of the
/// simplified `B±` with their Bogoliubov-angle form.
pub fn b_checks(hp: &HpParams) -> Vec<Check> {
    let (bp, bm) = (hp.b_plus, hp.b_minus);
    let (t, w) = (hp.temperature, hp.omega_b);
    let (fp, fm) = hp.b_from_bogoliubov();
    let scale = bp.abs().max(bm.abs()).max(1.0);
    vec![
        Check::bound("b_difference_of_squares", (bm * bm - bp * bp - hp.mz()).abs(), IDENTITY_TOL),
        Check::bound("b_ratio", (bp / bm - (4.0 * t - w) / (4.0 * t + w)).abs(), IDENTITY_TOL),
        Check::bound("b_bogoliubov_form", (fp - bp).abs().max((fm - bm).abs()) / scale, IDENTITY_TOL),
    ]
}

pub fn analytic(cfg: &AnalyticConfig, out: &Path) -> anyhow::Result<Report> {
    let quench = Quench { coupling: cfg.lambda, temperature: cfg.t, dissipation: cfg.gamma, theta: cfg.theta, spin: cfg.s };
    let hp = quench.hp()?;
    let grid = cfg.grid()?;
    let path = write_csv(out, "analytic.csv", &ANALYTIC_HEADER, analytic_rows(&quench, &grid)?)?;
    let tss = hp_analytic::stationary_temperature(cfg.lambda, cfg.t)?;
    let (beta_plus, beta_minus) = third_quantization::rapidities(cfg.lambda, cfg.gamma)?;
    Ok(Report {
        outputs: vec![path],
        checks: b_checks(&hp),
        summary: json!({
            "hp": hp,
            "stationary_temperature": tss,
            "beta_plus": c(beta_plus),
            "beta_minus": c(beta_minus),
            "lambda_minus_0": c(hp_analytic::liouvillian_eigenvalue(1, 0, cfg.lambda, cfg.gamma)?),
        }),
    })
}

pub fn oracle(cfg: &OracleConfig, out: &Path) -> anyhow::Result<Report> {
    let params = BosonParams::new(cfg.lambda, cfg.gamma, cfg.t)?;
    let superop = bosonic_oracle::bosonic_superoperator(cfg.lambda, cfg.gamma, cfg.t, cfg.n_max, cfg.model)?;
    let parity = bosonic_oracle::boson_parity_superoperator(superop.layout());
    let eigenvalues = spectral::diagonalize(&superop, &parity, DiagonalizeOptions::eigenvalues_only())?.eigenvalues;
    let kept = bosonic_oracle::away_from_edge(&eigenvalues, &params, cfg.n_max);
    if kept.is_empty() {
        bail!("no oracle eigenvalues away from the truncation edge; raise n_max");
    }
    let analytic = hp_analytic::analytic_spectrum(cfg.lambda, cfg.gamma, cfg.max_delta, cfg.max_n)?;
    let mut worst = 0.0_f64;
    let rows: Vec<Vec<String>> = analytic
        .iter()
        .map(|a| {
            let nearest = kept
                .iter()
                .copied()
                .min_by(|x, y| (x - a.value).norm().total_cmp(&(y - a.value).norm()))
                .expect("non-empty");
            let dev = (nearest - a.value).norm();
            worst = worst.max(dev);
            vec![
                a.delta.to_string(),
                a.n.to_string(),
                num(a.value.re),
                num(a.value.im),
                num(nearest.re),
                num(nearest.im),
                num(dev),
            ]
        })
        .collect();
    let header = ["delta", "n", "analytic_re", "analytic_im", "oracle_re", "oracle_im", "deviation"];
    let path = write_csv(out, "oracle.csv", &header, rows)?;

    let mut checks = vec![Check::bound("left_identity", superop.identity_left_residual(), LEFT_IDENTITY_TOL)];
    let mut summary = json!({
        "superoperator_dim": superop.dim(),
        "kept_eigenvalues": kept.len(),
        "max_deviation": worst,
    });
    if cfg.gamma > 0.0 {
        let st = bosonic_oracle::oracle_stationary(cfg.lambda, cfg.gamma, cfg.t, cfg.n_max, cfg.model)?;
        checks.extend(state_checks("stationary", &st.rho)?);
        summary["occupation"] = json!(st.occupation);
        summary["pair"] = json!(c(st.pair));
        match cfg.model {
            OracleModel::Full => {
                let z = third_quantization::z_matrix(cfg.lambda, cfg.gamma, cfg.t)?;
                summary["z12"] = json!(z.z12);
                summary["z11"] = json!(c(z.z11));
            }
            OracleModel::Secular => {
                let x = hp_analytic::hp_params(cfg.lambda, cfg.t)?.stationary_ratio();
                summary["thermal_occupation"] = json!(x / (1.0 - x));
            }
        }
    } else {
        checks.push(Check::skipped("stationary", "γ = 0 has no unique stationary state"));
    }
    Ok(Report { outputs: vec![path], checks, summary })
}
