//! One function per subcommand, each turning a resolved configuration into a
//! table. No I/O happens here.

use std::f64::consts::SQRT_2;

use cavspin::analytics::{
    cooperativity, gaussian_fast_pole_seed, gaussian_pole, gaussian_pole_derivative, gaussian_pole_residual, gaussian_pole_seed,
    lorentzian_kick_response, steady_state_moments_hom, weak_coupling_response,
};
use cavspin::broadening::{characteristic_width, discretize, Family, SubEnsembleGrid};
use cavspin::dynamics::{
    check_revival, collective_reduce, evolve_mean, evolve_moments, reduce_hermitian, spectral_abscissa,
    steady_state_hermitian, uniform_times, PropagationOptions, Relaxation, REVIVAL_DAMPING,
};
use cavspin::model::{build_drift_matrix, initial_state, DriftModel, InitialKind, SystemParams};
use cavspin::probing::{detuning_grid, spectrum_scan};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Experiment, RunConfig};
use crate::failure::Failure;
use crate::output::{fmt_f64, Cell, Table};

/// Field kick `⟨a_c(0)⟩` of the decay runs.
pub const KICK_AMPLITUDE: f64 = 1.0;
/// Spin tilt `S_x(0) = θN` of the moment runs.
pub const TILT_ANGLE: f64 = 1e-3;

pub fn run(cfg: &RunConfig) -> Result<Table, Failure> {
    let mut table = match cfg.experiment {
        Experiment::Decay => decay(cfg)?,
        Experiment::Moments => moments(cfg)?,
        Experiment::Spectrum => spectrum(cfg)?,
        Experiment::StabilitySweep => stability_sweep(cfg)?,
        Experiment::Pole => pole(cfg)?,
    };
    let mut header = cfg.echo();
    header.append(&mut table.header);
    table.header = header;
    Ok(table)
}

fn grid_and_model(cfg: &RunConfig, params: &SystemParams) -> Result<(SubEnsembleGrid, DriftModel), Failure> {
    let grid = discretize(&cfg.spec, cfg.m, params.g_ens, cfg.n_spins)?;
    let model = build_drift_matrix(params, &grid, cfg.p)?;
    Ok((grid, model))
}

/// Grid and integrator facts needed to reproduce a propagation.
fn propagation_header(grid: &SubEnsembleGrid, options: &PropagationOptions) -> Vec<(String, String)> {
    vec![
        ("grid_span".into(), fmt_f64(grid.span())),
        ("revival_time".into(), fmt_f64(grid.revival_time())),
        ("rtol".into(), fmt_f64(options.tolerances.rtol)),
        ("atol".into(), fmt_f64(options.tolerances.atol)),
        ("max_steps".into(), options.tolerances.max_steps.to_string()),
    ]
}

/// Why a closed form does not apply, or `None` when it does.
fn closed_form_gap(cfg: &RunConfig, families: &[Family]) -> Option<String> {
    if !families.contains(&cfg.spec.family()) {
        Some(format!("not defined for a {} line", cfg.spec.family().name()))
    } else if cfg.p != 1.0 {
        Some("defined for inverted spins only".into())
    } else if cfg.params.delta_cs != 0.0 {
        Some("defined for a resonant cavity only".into())
    } else {
        None
    }
}

fn decay(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = cfg.params;
    let (grid, model) = grid_and_model(cfg, &params)?;
    let times = uniform_times(cfg.t_max, cfg.t_samples)?;
    check_revival(&grid, params.gamma_perp, cfg.t_max)?;
    let (y0, _) = initial_state(InitialKind::FieldKick, &grid, KICK_AMPLITUDE, 0.0)?;
    let series = evolve_mean(&model, &y0, &times)?;
    let sim = series.x_c().ok_or_else(|| Failure::numerical("mean propagation returned no field values"))?;

    let mut header = propagation_header(&grid, &PropagationOptions::default());
    header.push(("kick_amplitude".into(), fmt_f64(KICK_AMPLITUDE)));

    let lorentzian = match closed_form_gap(cfg, &[Family::Homogeneous, Family::Lorentzian]) {
        Some(why) => {
            header.push(("X_c_lorentzian_analytic".into(), format!("empty, {why}")));
            None
        }
        None => {
            let gamma = characteristic_width(&cfg.spec, params.gamma_perp)?;
            Some(gamma)
        }
    };
    let gaussian_gap = closed_form_gap(cfg, &[Family::Gaussian]);
    if let Some(why) = &gaussian_gap {
        header.push(("X_c_weak_coupling".into(), format!("empty, {why}")));
        header.push(("X_c_pole_tail".into(), format!("empty, {why}")));
    }
    let sigma = cfg.spec.width();
    let pole = if gaussian_gap.is_none() {
        match slow_pole(&params, sigma) {
            Ok((lambda, residue)) => {
                header.push(("slow_pole_re".into(), fmt_f64(lambda.re)));
                header.push(("slow_pole_im".into(), fmt_f64(lambda.im)));
                Some((lambda, residue))
            }
            Err(e) => {
                header.push(("X_c_pole_tail".into(), format!("empty, pole search failed: {e}")));
                None
            }
        }
    } else {
        None
    };

    let rows = times
        .iter()
        .zip(&sim)
        .map(|(&t, &x)| {
            let lor = lorentzian.map(|gamma| {
                SQRT_2 * lorentzian_kick_response(KICK_AMPLITUDE, params.kappa, gamma, params.g_ens, t).re
            });
            let weak = gaussian_gap
                .is_none()
                .then(|| SQRT_2 * weak_coupling_response(KICK_AMPLITUDE, &params, sigma, t));
            let tail = pole.map(|(lambda, residue)| SQRT_2 * (KICK_AMPLITUDE * residue * (lambda * t).exp()).re);
            vec![Cell::Num(t), Cell::Num(x), Cell::opt(lor), Cell::opt(weak), Cell::opt(tail)]
        })
        .collect();
    Ok(Table {
        header,
        columns: vec!["t", "X_c_sim", "X_c_lorentzian_analytic", "X_c_weak_coupling", "X_c_pole_tail"],
        rows,
        summary: Vec::new(),
    })
}

/// Slow Gaussian pole and its residue `1/F'(λ)`.
fn slow_pole(params: &SystemParams, sigma: f64) -> Result<(Complex64, Complex64), Failure> {
    let lambda = gaussian_pole(params, sigma, gaussian_pole_seed(params, sigma)?)?;
    let residue = 1.0 / gaussian_pole_derivative(params, sigma, lambda)?;
    Ok((lambda, residue))
}

fn moments(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = cfg.params;
    let (grid, model) = grid_and_model(cfg, &params)?;
    let times = uniform_times(cfg.t_max, cfg.t_samples)?;
    check_revival(&grid, params.gamma_perp, cfg.t_max)?;
    let (y0, g0) = initial_state(InitialKind::TiltedSpin, &grid, 0.0, TILT_ANGLE)?;
    let options = PropagationOptions::default();
    let mut series = evolve_moments(&model, Some(&y0), Some(&g0), &times, &options)?;
    collective_reduce(&mut series, &model)?;

    let n = grid.total_spins();
    let mut header = propagation_header(&grid, &options);
    header.push(("tilt_angle".into(), fmt_f64(TILT_ANGLE)));

    let gamma = characteristic_width(&cfg.spec, params.gamma_perp)?;
    let c = cooperativity(params.g_ens, params.kappa, gamma);
    let continuum_stable = cfg.p == -1.0 || c < 1.0;
    header.push(("Gamma".into(), fmt_f64(gamma)));
    header.push(("C".into(), fmt_f64(c)));

    let last = |f: fn(&cavspin::dynamics::CollectiveVariances) -> f64| -> Result<f64, Failure> {
        series
            .reductions
            .last()
            .and_then(|r| r.variances.as_ref().map(f))
            .ok_or_else(|| Failure::numerical("variance propagation returned no values"))
    };
    // Steady (Var S_x, Var P_c): exact when the discrete model has one, else the
    // end-of-window plateau when the continuum is stable.
    let steady = match series.relaxation {
        Relaxation::Reference(var_sx) => {
            let h = steady_state_hermitian(&model)?;
            header.push(("relaxation_reference".into(), "exact".into()));
            Some((var_sx, reduce_hermitian(&h).var_p_c))
        }
        _ if continuum_stable => {
            let (var_sx, var_pc) = (last(|v| v.var_s_x)?, last(|v| v.var_p_c)?);
            series.set_relaxation_reference(var_sx)?;
            header.push(("relaxation_reference".into(), "window end".into()));
            Some((var_sx, var_pc))
        }
        _ => {
            header.push(("relaxation_reference".into(), "none, no steady state".into()));
            None
        }
    };

    let s_x0 = series.reductions[0].means.map(|m| m.s_x).unwrap_or(0.0);
    let rows = series
        .reductions
        .iter()
        .map(|r| {
            let means = r.means.ok_or_else(|| Failure::numerical("missing means"))?;
            let v = r.variances.ok_or_else(|| Failure::numerical("missing variances"))?;
            Ok(vec![
                Cell::Num(r.t),
                Cell::Num(means.s_x / s_x0),
                Cell::Num(means.p_c),
                Cell::Num(v.var_s_x / n - 1.0),
                Cell::Num(2.0 * v.var_p_c - 1.0),
                Cell::opt(r.relaxation),
            ])
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut summary = Vec::new();
    if let (Some((var_sx, var_pc)), true) = (steady, cfg.p == 1.0 && c < 1.0) {
        let two_mode = steady_state_moments_hom(params.kappa, gamma, params.g_ens, n)?;
        let excess_sx = var_sx / n - 1.0;
        let excess_pc = 2.0 * var_pc - 1.0;
        let ref_sx = two_mode.var_s_x / n - 1.0;
        let ref_pc = 2.0 * two_mode.var_p_c - 1.0;
        summary.push(("steady_VarSx_over_N_minus_1".into(), fmt_f64(excess_sx)));
        summary.push(("steady_twoVarPc_minus_1".into(), fmt_f64(excess_pc)));
        summary.push(("two_mode_VarSx_over_N_minus_1".into(), fmt_f64(ref_sx)));
        summary.push(("two_mode_twoVarPc_minus_1".into(), fmt_f64(ref_pc)));
        summary.push(("ratio_VarSx".into(), fmt_f64(excess_sx / ref_sx)));
        summary.push(("ratio_VarPc".into(), fmt_f64(excess_pc / ref_pc)));
    }
    Ok(Table {
        header,
        columns: vec!["t", "Sx_over_Sx0", "Pc", "VarSx_over_N_minus_1", "twoVarPc_minus_1", "R"],
        rows,
        summary,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Table, Failure> {
    let (lo, hi, n) = cfg.delta_e;
    let grid = detuning_grid(lo, hi, n)?;
    let table = spectrum_scan(&cfg.params, &cfg.spec, cfg.p, &grid)?;
    let mut header = Vec::new();
    if cfg.p != 1.0 && cfg.p != -1.0 {
        header.push(("p_note".into(), "fractional polarization enters only through pC; heuristic".into()));
    }
    header.push(("flagged_rows".into(), table.flagged().to_string()));
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let (r, t) = (row.r, row.t);
            vec![
                Cell::Num(row.delta_e),
                Cell::opt(t.map(|t| t.re)),
                Cell::opt(t.map(|t| t.im)),
                Cell::opt(row.abs_t2()),
                Cell::opt(r.map(|r| r.re)),
                Cell::opt(r.map(|r| r.im)),
                Cell::opt(row.abs_r2()),
                row.flag.clone().map_or(Cell::Empty, Cell::Text),
            ]
        })
        .collect();
    Ok(Table {
        header,
        columns: vec!["delta_e", "re_t", "im_t", "abs_t2", "re_r", "im_r", "abs_r2", "flag"],
        rows,
        summary: Vec::new(),
    })
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

/// Number of samples in a windowed verdict run.
const WINDOW_SAMPLES: usize = 101;

/// Stable when the mean cavity energy over the last fifth of a kick run is
/// below that over the fifth before it. Comparing late fifths, not the start,
/// keeps the fast initial transient from masking a slow growing pole.
fn windowed_verdict(model: &DriftModel, t_window: f64) -> Result<bool, Failure> {
    let (y0, _) = initial_state(InitialKind::FieldKick, model.grid(), KICK_AMPLITUDE, 0.0)?;
    let times = uniform_times(t_window, WINDOW_SAMPLES)?;
    let series = evolve_mean(model, &y0, &times)?;
    let energy: Vec<f64> = series.means.iter().map(|y| y[0] * y[0] + y[1] * y[1]).collect();
    let fifth = WINDOW_SAMPLES / 5;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let n = energy.len();
    Ok(mean(&energy[n - fifth..]) < mean(&energy[n - 2 * fifth..n - fifth]))
}

fn stability_sweep(cfg: &RunConfig) -> Result<Table, Failure> {
    let gs = axis(cfg.sweep_g.0, cfg.sweep_g.1, cfg.sweep_samples);
    let ks = axis(cfg.sweep_kappa.0, cfg.sweep_kappa.1, cfg.sweep_samples);
    let points: Vec<(f64, f64)> = gs.iter().flat_map(|&g| ks.iter().map(move |&k| (g, k))).collect();
    let gamma = characteristic_width(&cfg.spec, cfg.params.gamma_perp)?;
    let t_window = cfg.t_max;

    // Points run in parallel; collect keeps the input order.
    let rows = points
        .par_iter()
        .map(|&(g, kappa)| -> Result<Vec<Cell>, Failure> {
            let params = SystemParams::new(
                kappa * cfg.params.kappa1 / cfg.params.kappa,
                kappa * cfg.params.kappa2 / cfg.params.kappa,
                cfg.params.gamma_perp,
                g,
                cfg.params.delta_cs,
            )?;
            let (grid, model) = grid_and_model(cfg, &params)?;
            let c = cooperativity(g, kappa, gamma);
            let stable_analytic = cfg.p == -1.0 || c < 1.0;
            let abscissa = spectral_abscissa(&model)?;
            // Eigenvalues decide only when dephasing washes out the grid's revivals.
            let eigen = params.gamma_perp * grid.revival_time() >= REVIVAL_DAMPING;
            let (stable_numeric, method) = if eigen {
                (abscissa < 0.0, "eigenvalues")
            } else {
                check_revival(&grid, params.gamma_perp, t_window)?;
                (windowed_verdict(&model, t_window)?, "window")
            };
            Ok(vec![
                Cell::Num(g),
                Cell::Num(kappa),
                Cell::Num(gamma),
                Cell::Num(c),
                Cell::Num(abscissa),
                Cell::Bool(stable_analytic),
                Cell::Bool(stable_numeric),
                Cell::Text(method.into()),
            ])
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let disagree = rows.iter().filter(|r| r[5] != r[6]).count();
    let header = vec![
        ("t_window".into(), fmt_f64(t_window)),
        ("window_samples".into(), WINDOW_SAMPLES.to_string()),
        ("kick_amplitude".into(), fmt_f64(KICK_AMPLITUDE)),
    ];
    Ok(Table {
        header,
        columns: vec![
            "g_ens",
            "kappa",
            "Gamma",
            "C",
            "spectral_abscissa_discrete",
            "stable_analytic",
            "stable_numeric",
            "numeric_method",
        ],
        rows,
        summary: vec![("points".into(), points.len().to_string()), ("disagreements".into(), disagree.to_string())],
    })
}

fn pole(cfg: &RunConfig) -> Result<Table, Failure> {
    if cfg.p != 1.0 {
        return Err(Failure::precondition("the pole condition is for inverted spins; use p = +1"));
    }
    if cfg.params.delta_cs != 0.0 {
        return Err(Failure::precondition("the pole condition assumes a resonant cavity; use delta-cs = 0"));
    }
    let params = cfg.params;
    let sigma = cfg.spec.width();
    let seeds = [("slow", gaussian_pole_seed(&params, sigma)?), ("fast", gaussian_fast_pole_seed(&params))];
    let mut roots: Vec<Complex64> = Vec::new();
    let mut rows = Vec::new();
    for (name, seed) in seeds {
        let lambda = gaussian_pole(&params, sigma, seed)?;
        let residual = gaussian_pole_residual(&params, sigma, lambda)?;
        let residue = 1.0 / gaussian_pole_derivative(&params, sigma, lambda)?;
        // Distinct seeds can share a basin; say so instead of listing one root twice.
        let note = match roots.iter().position(|r| (r - lambda).norm() <= 1e-8 * params.kappa) {
            Some(k) => Cell::Text(format!("same root as {}", seeds[k].0)),
            None => Cell::Empty,
        };
        roots.push(lambda);
        rows.push(vec![
            Cell::Text(name.into()),
            Cell::Num(seed.re),
            Cell::Num(seed.im),
            Cell::Num(lambda.re),
            Cell::Num(lambda.im),
            Cell::Num(residual),
            Cell::Num(residue.re),
            Cell::Num(residue.im),
            note,
        ]);
    }
    let gamma = characteristic_width(&cfg.spec, params.gamma_perp)?;
    Ok(Table {
        header: vec![
            ("Gamma".into(), fmt_f64(gamma)),
            ("C".into(), fmt_f64(cooperativity(params.g_ens, params.kappa, gamma))),
        ],
        columns: vec!["pole", "seed_re", "seed_im", "re", "im", "residual", "residue_re", "residue_im", "note"],
        rows,
        summary: Vec::new(),
    })
}
