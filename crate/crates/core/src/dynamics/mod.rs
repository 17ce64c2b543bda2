//! Time propagation of means and covariances, steady states, stability, and
//! reduction to collective observables.
//!
//! Covariances with zero pseudo-covariance (every coherent initial state here)
//! are propagated in the reduced Hermitian form of size `M + 1`; anything else
//! falls back to the full real `(2M + 2)²` matrix equation.

pub mod lyapunov;
pub mod rk45;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::broadening::SubEnsembleGrid;
use crate::error::{Error, Result};
use crate::model::{
    from_hermitian_covariance, pseudo_covariance_defect, to_hermitian_covariance, CovarianceMatrix,
    DriftModel, StateVector,
};

pub use lyapunov::ComplexSchur;
pub use rk45::{Stats, Tolerances};

/// Revivals are ignored once dephasing has damped them by `e^{-10}`.
pub const REVIVAL_DAMPING: f64 = 10.0;
/// Required ratio of revival time to simulated window.
pub const REVIVAL_MARGIN: f64 = 4.0;

const PHASE_COVARIANT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveMeans {
    pub x_c: f64,
    pub p_c: f64,
    pub s_x: f64,
    pub s_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveVariances {
    pub var_x_c: f64,
    pub var_p_c: f64,
    pub var_s_x: f64,
    pub var_s_y: f64,
}

/// Collective observables at one output time. `relaxation` is
/// `R = (V∞ - V(t)) / (V∞ - V(0))` for `V = Var(S_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub t: f64,
    pub means: Option<CollectiveMeans>,
    pub variances: Option<CollectiveVariances>,
    pub relaxation: Option<f64>,
}

/// Reference level behind the relaxation ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relaxation {
    NotComputed,
    /// Steady `Var(S_x)` the ratio is measured against.
    Reference(f64),
    /// No steady state exists; the ratio is undefined.
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    /// Mean vectors per time; empty for covariance-only runs.
    pub means: Vec<StateVector>,
    /// Covariance snapshots per time; empty unless requested.
    pub covariances: Vec<CovarianceMatrix>,
    pub reductions: Vec<Reduction>,
    pub relaxation: Relaxation,
    pub stats: Stats,
}

impl MomentSeries {
    fn empty(times: &[f64]) -> Self {
        Self {
            times: times.to_vec(),
            means: Vec::new(),
            covariances: Vec::new(),
            reductions: times
                .iter()
                .map(|&t| Reduction { t, means: None, variances: None, relaxation: None })
                .collect(),
            relaxation: Relaxation::NotComputed,
            stats: Stats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Collective `Var(S_x)` per time, if variances were propagated.
    pub fn var_s_x(&self) -> Option<Vec<f64>> {
        self.reductions.iter().map(|r| r.variances.map(|v| v.var_s_x)).collect()
    }

    /// `X_c` per time, if means were propagated.
    pub fn x_c(&self) -> Option<Vec<f64>> {
        self.reductions.iter().map(|r| r.means.map(|m| m.x_c)).collect()
    }

    /// Fills the relaxation ratio against a given steady `Var(S_x)`.
    pub fn set_relaxation_reference(&mut self, var_inf: f64) -> Result<()> {
        let values = self
            .var_s_x()
            .ok_or_else(|| Error::InvalidParameter("relaxation ratio needs propagated variances".into()))?;
        let ratio = relative_deviation(&values, var_inf)?;
        for (r, v) in self.reductions.iter_mut().zip(ratio) {
            r.relaxation = Some(v);
        }
        self.relaxation = Relaxation::Reference(var_inf);
        Ok(())
    }

    fn mark_relaxation_undefined(&mut self) {
        for r in &mut self.reductions {
            r.relaxation = None;
        }
        self.relaxation = Relaxation::Undefined;
    }
}

/// Which covariance equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovariancePath {
    /// Hermitian form when the initial covariance allows it, full real otherwise.
    #[default]
    Auto,
    Full,
    Hermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationOptions {
    pub tolerances: Tolerances,
    pub path: CovariancePath,
    /// Keep a covariance snapshot at every output time.
    pub store_covariances: bool,
}

/// Uniform grid of `samples` times on `[0, t_max]`.
pub fn uniform_times(t_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("time window must be positive (got {t_max})")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least two time samples (got {samples})")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples).map(|k| t_max * k as f64 / last).collect())
}

/// Rejects windows long enough for the discrete grid to rephase.
///
/// Applies only to broadened grids whose revivals are not already damped by
/// dephasing (`γ⊥ T_rev < 10`).
pub fn check_revival(grid: &SubEnsembleGrid, gamma_perp: f64, t_max: f64) -> Result<()> {
    let revival_time = grid.revival_time();
    if !revival_time.is_finite() || gamma_perp * revival_time >= REVIVAL_DAMPING {
        return Ok(());
    }
    let required = REVIVAL_MARGIN * t_max;
    if revival_time < required {
        return Err(Error::Revival { revival_time, required });
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("time grid must start at t = 0".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn check_model(model: &DriftModel, times: &[f64]) -> Result<()> {
    if !model.is_finite() {
        return Err(Error::InvalidParameter("drift model has non-finite entries".into()));
    }
    check_times(times)?;
    check_revival(model.grid(), model.params().gamma_perp, *times.last().unwrap())
}

fn mean_reduction(y: &[f64]) -> CollectiveMeans {
    let (mut s_x, mut s_y) = (0.0, 0.0);
    for pair in y[2..].chunks_exact(2) {
        s_x += pair[0];
        s_y += pair[1];
    }
    CollectiveMeans { x_c: y[0], p_c: y[1], s_x, s_y }
}

/// Collective variances of a real covariance matrix.
pub fn reduce_covariance(gamma: &DMatrix<f64>) -> CollectiveVariances {
    let n = gamma.nrows();
    let (mut sxx, mut syy) = (0.0, 0.0);
    for j in (2..n).step_by(2) {
        for i in (2..n).step_by(2) {
            sxx += gamma[(i, j)];
            syy += gamma[(i + 1, j + 1)];
        }
    }
    CollectiveVariances {
        var_x_c: 0.5 * gamma[(0, 0)],
        var_p_c: 0.5 * gamma[(1, 1)],
        var_s_x: 0.5 * sxx,
        var_s_y: 0.5 * syy,
    }
}

/// Collective variances of a phase-covariant state given in Hermitian form.
pub fn reduce_hermitian(h: &DMatrix<Complex64>) -> CollectiveVariances {
    let n = h.nrows();
    let mut spin = 0.0;
    for j in 1..n {
        for i in 1..n {
            spin += h[(i, j)].re;
        }
    }
    let field = 0.25 * h[(0, 0)].re;
    CollectiveVariances { var_x_c: field, var_p_c: field, var_s_x: 0.25 * spin, var_s_y: 0.25 * spin }
}

/// `R_i = (V∞ - V_i) / (V∞ - V_0)`.
pub fn relative_deviation(values: &[f64], var_inf: f64) -> Result<Vec<f64>> {
    let first = *values
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty series".into()))?;
    let range = var_inf - first;
    if range == 0.0 || !range.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "relative deviation needs V∞ ≠ V(0) (both {first})"
        )));
    }
    Ok(values.iter().map(|v| (var_inf - v) / range).collect())
}

/// Least-squares slope of `ln|v|` against `t`.
pub fn fit_log_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two matching samples to fit a rate".into()));
    }
    if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::Domain("cannot fit a log-slope through zero or non-finite samples".into()));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    let mt = times.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    Ok(sxy / sxx)
}

/// Propagates `dy/dt = M y`.
pub fn evolve_mean(model: &DriftModel, y0: &StateVector, times: &[f64]) -> Result<MomentSeries> {
    evolve_moments(model, Some(y0), None, times, &PropagationOptions::default())
}

/// Propagates `dγ/dt = Mγ + γMᵀ + N` and keeps every snapshot.
pub fn evolve_covariance(model: &DriftModel, gamma0: &CovarianceMatrix, times: &[f64]) -> Result<MomentSeries> {
    let options = PropagationOptions { store_covariances: true, ..PropagationOptions::default() };
    evolve_moments(model, None, Some(gamma0), times, &options)
}

/// Propagates means and/or covariances and fills the collective reductions.
pub fn evolve_moments(
    model: &DriftModel,
    y0: Option<&StateVector>,
    gamma0: Option<&CovarianceMatrix>,
    times: &[f64],
    options: &PropagationOptions,
) -> Result<MomentSeries> {
    check_model(model, times)?;
    let mut series = MomentSeries::empty(times);
    if let Some(y0) = y0 {
        if y0.len() != model.dim() {
            return Err(Error::InvalidParameter(format!(
                "state has length {} but the model has dimension {}",
                y0.len(),
                model.dim()
            )));
        }
        let stats = propagate_mean(model, y0, times, &options.tolerances, &mut series)?;
        series.stats = stats;
    }
    if let Some(gamma0) = gamma0 {
        check_covariance(model, gamma0)?;
        let hermitian = match options.path {
            CovariancePath::Full => false,
            CovariancePath::Hermitian => {
                if pseudo_covariance_defect(gamma0) > PHASE_COVARIANT_TOL {
                    return Err(Error::InvalidParameter(
                        "initial covariance has a non-zero pseudo-covariance; use the full path".into(),
                    ));
                }
                true
            }
            CovariancePath::Auto => pseudo_covariance_defect(gamma0) <= PHASE_COVARIANT_TOL,
        };
        let stats = if hermitian {
            propagate_hermitian(model, gamma0, times, options, &mut series)?
        } else {
            propagate_full(model, gamma0, times, options, &mut series)?
        };
        series.stats.accepted += stats.accepted;
        series.stats.rejected += stats.rejected;
        series.stats.evaluations += stats.evaluations;
    }
    Ok(series)
}

fn check_covariance(model: &DriftModel, gamma0: &CovarianceMatrix) -> Result<()> {
    let n = model.dim();
    if gamma0.nrows() != n || gamma0.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "covariance is {}×{} but the model has dimension {n}",
            gamma0.nrows(),
            gamma0.ncols()
        )));
    }
    let scale = gamma0.amax().max(f64::MIN_POSITIVE);
    if (gamma0 - gamma0.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidParameter("initial covariance is not symmetric".into()));
    }
    Ok(())
}

fn propagate_mean(
    model: &DriftModel,
    y0: &StateVector,
    times: &[f64],
    tol: &Tolerances,
    series: &mut MomentSeries,
) -> Result<Stats> {
    let mut means = Vec::with_capacity(times.len());
    let stats = rk45::integrate(
        |_, y, dy| model.apply_into(y, dy),
        y0.as_slice().to_vec(),
        times,
        tol,
        |_| {},
        |i, _, y| {
            series.reductions[i].means = Some(mean_reduction(y));
            means.push(DVector::from_column_slice(y));
            Ok(())
        },
    )?;
    series.means = means;
    Ok(stats)
}

fn propagate_full(
    model: &DriftModel,
    gamma0: &CovarianceMatrix,
    times: &[f64],
    options: &PropagationOptions,
    series: &mut MomentSeries,
) -> Result<Stats> {
    let n = model.dim();
    let noise = model.noise_diagonal();
    let mut product = vec![0.0; n * n];
    let rhs = |_: f64, g: &[f64], dg: &mut [f64]| {
        for j in 0..n {
            model.apply_into(&g[j * n..(j + 1) * n], &mut product[j * n..(j + 1) * n]);
        }
        for j in 0..n {
            for i in 0..n {
                dg[i + j * n] = product[i + j * n] + product[j + i * n];
            }
            dg[j + j * n] += noise[j];
        }
    };
    let symmetrize = |g: &mut [f64]| {
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (g[i + j * n] + g[j + i * n]);
                g[i + j * n] = v;
                g[j + i * n] = v;
            }
        }
    };
    let mut snapshots = Vec::new();
    let stats = rk45::integrate(
        rhs,
        gamma0.as_slice().to_vec(),
        times,
        &options.tolerances,
        symmetrize,
        |i, _, g| {
            let gamma = DMatrix::from_column_slice(n, n, g);
            series.reductions[i].variances = Some(reduce_covariance(&gamma));
            if options.store_covariances {
                snapshots.push(gamma);
            }
            Ok(())
        },
    )?;
    series.covariances = snapshots;
    Ok(stats)
}

/// Lower triangle of a Hermitian matrix, column by column, as interleaved
/// real and imaginary parts.
struct PackedLower {
    n: usize,
}

impl PackedLower {
    fn offset(&self, j: usize) -> usize {
        j * self.n - j * j.saturating_sub(1) / 2
    }

    /// Position of the real part of entry `(i, j)`, `i ≥ j`.
    fn at(&self, i: usize, j: usize) -> usize {
        2 * (self.offset(j) + i - j)
    }

    fn len(&self) -> usize {
        self.n * (self.n + 1)
    }

    fn pack(&self, h: &DMatrix<Complex64>) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.len());
        for j in 0..self.n {
            for i in j..self.n {
                s.push(h[(i, j)].re);
                s.push(h[(i, j)].im);
            }
        }
        s
    }

    fn unpack(&self, s: &[f64]) -> DMatrix<Complex64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in j..self.n {
                let k = self.at(i, j);
                let v = Complex64::new(s[k], s[k + 1]);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    }

    fn reduce(&self, s: &[f64]) -> CollectiveVariances {
        let mut spin = 0.0;
        for j in 1..self.n {
            spin += s[self.at(j, j)];
            for i in (j + 1)..self.n {
                spin += 2.0 * s[self.at(i, j)];
            }
        }
        let field = 0.25 * s[0];
        CollectiveVariances { var_x_c: field, var_p_c: field, var_s_x: 0.25 * spin, var_s_y: 0.25 * spin }
    }
}

fn propagate_hermitian(
    model: &DriftModel,
    gamma0: &CovarianceMatrix,
    times: &[f64],
    options: &PropagationOptions,
    series: &mut MomentSeries,
) -> Result<Stats> {
    let n = model.sub_ensembles() + 1;
    let layout = PackedLower { n };
    let diag = model.complex_diagonal();
    // Full row 0 of K, diagonal included, conjugated for v = H conj(r).
    let row_conj: Vec<Complex64> = std::iter::once(diag[0])
        .chain(model.complex_field_row())
        .map(|z| z.conj())
        .collect();
    let col = model.complex_spin_column();
    let noise = model.complex_noise_diagonal();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut h0 = vec![Complex64::new(0.0, 0.0); n];

    // With P = KH, Ḣ = P + Pᴴ + N_c. Row 0 of P is conj(H conj(r))ᵀ; rows below
    // involve only column 0 and the diagonal of K.
    let rhs = |_: f64, s: &[f64], ds: &mut [f64]| {
        v.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        let mut k = 0;
        for j in 0..n {
            let rj = row_conj[j];
            let hjj = Complex64::new(s[k], s[k + 1]);
            let mut acc = hjj * rj;
            k += 2;
            for i in (j + 1)..n {
                let hij = Complex64::new(s[k], s[k + 1]);
                v[i] += hij * rj;
                acc += hij.conj() * row_conj[i];
                k += 2;
            }
            v[j] += acc;
        }
        for (i, slot) in h0.iter_mut().enumerate() {
            let k = 2 * i;
            *slot = Complex64::new(s[k], s[k + 1]);
        }
        ds[0] = 2.0 * v[0].re + noise[0];
        ds[1] = 0.0;
        for i in 1..n {
            let d = col[i - 1] * h0[0] + diag[i] * h0[i] + v[i];
            ds[2 * i] = d.re;
            ds[2 * i + 1] = d.im;
        }
        let mut k = 2 * n;
        for j in 1..n {
            let dj = diag[j].conj();
            let cj = col[j - 1].conj();
            let h0j = h0[j].conj();
            for i in j..n {
                let hij = Complex64::new(s[k], s[k + 1]);
                let mut d = (diag[i] + dj) * hij + col[i - 1] * h0j + cj * h0[i];
                if i == j {
                    d = Complex64::new(d.re + noise[i], 0.0);
                }
                ds[k] = d.re;
                ds[k + 1] = d.im;
                k += 2;
            }
        }
    };
    let clear_diagonal_imag = |s: &mut [f64]| {
        for j in 0..n {
            s[layout.at(j, j) + 1] = 0.0;
        }
    };
    let mut snapshots = Vec::new();
    let stats = rk45::integrate(
        rhs,
        layout.pack(&to_hermitian_covariance(gamma0)),
        times,
        &options.tolerances,
        clear_diagonal_imag,
        |i, _, s| {
            series.reductions[i].variances = Some(layout.reduce(s));
            if options.store_covariances {
                snapshots.push(from_hermitian_covariance(&layout.unpack(s)));
            }
            Ok(())
        },
    )?;
    series.covariances = snapshots;
    Ok(stats)
}

/// Eigenvalues of the complex drift `K`.
pub fn complex_drift_eigenvalues(model: &DriftModel) -> Result<Vec<Complex64>> {
    let k = model.complex_drift();
    let mat = faer::Mat::<faer::c64>::from_fn(k.nrows(), k.ncols(), |i, j| {
        let z = k[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let ev = mat
        .eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Largest real part over the drift spectrum.
pub fn spectral_abscissa(model: &DriftModel) -> Result<f64> {
    let ev = complex_drift_eigenvalues(model)?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

fn abscissa_of(schur: &ComplexSchur) -> f64 {
    schur.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of the real drift: those of `K` and their conjugates.
pub fn drift_eigenvalues(model: &DriftModel) -> Result<Vec<Complex64>> {
    let ev = complex_drift_eigenvalues(model)?;
    Ok(ev.into_iter().flat_map(|z| [z, z.conj()]).collect())
}

/// Stationary covariance in Hermitian form, `KH + HKᴴ + N_c = 0`.
pub fn steady_state_hermitian(model: &DriftModel) -> Result<DMatrix<Complex64>> {
    let k = model.complex_drift();
    let schur = ComplexSchur::new(&k)?;
    let abscissa = abscissa_of(&schur);
    // Marginal modes are unstable for this purpose; scale by the largest rate.
    let scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if abscissa >= -1e-12 * scale {
        return Err(Error::Unstable(format!(
            "spectral abscissa {abscissa:e} ≥ 0: the variances grow without bound and no steady state exists"
        )));
    }
    let n = k.nrows();
    let noise = model.complex_noise_diagonal();
    let f = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(-noise[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let mut h = schur.solve_lyapunov(&f)?;
    lyapunov::hermitize(&mut h);
    Ok(h)
}

/// Solves `Mγ + γMᵀ + N = 0`.
pub fn steady_state_covariance(model: &DriftModel) -> Result<CovarianceMatrix> {
    let h = steady_state_hermitian(model)?;
    let mut gamma = from_hermitian_covariance(&h);
    let sym = 0.5 * (&gamma + gamma.transpose());
    gamma.copy_from(&sym);
    Ok(gamma)
}

/// `‖Mγ + γMᵀ + N‖_max`.
pub fn lyapunov_residual(model: &DriftModel, gamma: &CovarianceMatrix) -> f64 {
    let mg = model.left_multiply(gamma);
    let mut r = &mg + mg.transpose();
    for (i, v) in model.noise_diagonal().iter().enumerate() {
        r[(i, i)] += v;
    }
    r.amax()
}

/// Fills collective reductions from stored data and the relaxation ratio from
/// the exact steady state when one exists; marks it undefined otherwise.
pub fn collective_reduce(series: &mut MomentSeries, model: &DriftModel) -> Result<()> {
    for (r, y) in series.reductions.iter_mut().zip(&series.means) {
        r.means = Some(mean_reduction(y.as_slice()));
    }
    for (r, g) in series.reductions.iter_mut().zip(&series.covariances) {
        r.variances = Some(reduce_covariance(g));
    }
    if series.var_s_x().is_none() {
        return Ok(());
    }
    match steady_state_hermitian(model) {
        Ok(h) => series.set_relaxation_reference(reduce_hermitian(&h).var_s_x),
        Err(Error::Unstable(_)) => {
            series.mark_relaxation_undefined();
            Ok(())
        }
        Err(e) => Err(e),
    }
}
