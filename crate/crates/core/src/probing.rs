//! Driven-cavity response: the steady driven field, reflection and
//! transmission, cooperativity estimates from either, inversion drain and
//! the photon budget.
//!
//! The drive `β(t) = β₀ e^{-iΔ_e t}` enters `d⟨a_c⟩/dt` as `√(2κ₁) β`. Drift
//! models never carry a drive; [`driven_steady_state`] and
//! [`evolve_driven_mean`] add it on top of a [`DriftModel`].

use std::f64::consts::SQRT_2;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::analytics::cooperativity;
use crate::broadening::{characteristic_width, susceptibility, BroadeningSpec};
use crate::dynamics::rk45::{integrate, Tolerances};
use crate::error::{Error, Result};
use crate::model::{CovarianceMatrix, DriftModel, StateVector, SystemParams};

/// Drive amplitude, detuning and inversion. `p` may be fractional in
/// `[-1, 1]`; only `±1` is derived, anything between rests on substituting
/// `pC` for `±C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub beta0: Complex64,
    pub delta_e: f64,
    pub p: f64,
}

impl ProbeConfig {
    pub fn new(beta0: Complex64, delta_e: f64, p: f64) -> Result<Self> {
        let probe = Self { beta0, delta_e, p };
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta0.re.is_finite() && self.beta0.im.is_finite() && self.delta_e.is_finite()) {
            return Err(Error::InvalidParameter("drive amplitude and detuning must be finite".into()));
        }
        if !(self.p.is_finite() && (-1.0..=1.0).contains(&self.p)) {
            return Err(Error::InvalidParameter(format!("inversion p must lie in [-1, 1] (got {})", self.p)));
        }
        Ok(())
    }
}

fn check_driven(params: &SystemParams, spec: &BroadeningSpec, p: f64) -> Result<()> {
    params.validate()?;
    if params.delta_cs != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "driven response assumes a cavity resonant with the spins (delta_cs = {})",
            params.delta_cs
        )));
    }
    if p > 0.0 {
        let gamma = characteristic_width(spec, params.gamma_perp)?;
        let c = cooperativity(params.g_ens, params.kappa, gamma);
        if p * c >= 1.0 {
            return Err(Error::Unstable(format!(
                "pC = {} ≥ 1: an inverted sample above threshold has no driven steady state",
                p * c
            )));
        }
    }
    Ok(())
}

/// `κ - iΔ_e - p g² ∫ f(Δ)dΔ/(γ⊥ + i(Δ - Δ_e))`.
fn response_denominator(params: &SystemParams, spec: &BroadeningSpec, probe: &ProbeConfig) -> Result<Complex64> {
    probe.validate()?;
    check_driven(params, spec, probe.p)?;
    let chi = susceptibility(spec, params.gamma_perp, probe.delta_e)?;
    let denom = Complex64::new(params.kappa, -probe.delta_e) - probe.p * params.g_ens * params.g_ens * chi;
    if denom.norm() == 0.0 {
        return Err(Error::Domain(format!("driven response diverges at delta_e = {}", probe.delta_e)));
    }
    Ok(denom)
}

/// `⟨a_c⟩ = √(2κ₁)β/(κ - iΔ_e - p g² ∫ f(Δ)dΔ/(γ⊥ + i(Δ - Δ_e)))` in the frame of the drive.
pub fn driven_field(params: &SystemParams, spec: &BroadeningSpec, probe: &ProbeConfig) -> Result<Complex64> {
    let denom = response_denominator(params, spec, probe)?;
    Ok((2.0 * params.kappa1).sqrt() * probe.beta0 / denom)
}

/// `(r, t)` with `r = (√(2κ₁)⟨a_c⟩ - β)/β` and `t = √(2κ₂)⟨a_c⟩/β`. Both are
/// independent of `β₀`, so they are formed with `β` cancelled.
pub fn reflection_transmission(
    params: &SystemParams,
    spec: &BroadeningSpec,
    probe: &ProbeConfig,
) -> Result<(Complex64, Complex64)> {
    let denom = response_denominator(params, spec, probe)?;
    let r = 2.0 * params.kappa1 / denom - 1.0;
    let t = 2.0 * (params.kappa1 * params.kappa2).sqrt() / denom;
    Ok((r, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub delta_e: f64,
    /// `None` when the row violates a precondition; see `flag`.
    pub r: Option<Complex64>,
    pub t: Option<Complex64>,
    pub flag: Option<String>,
}

impl SpectrumRow {
    pub fn abs_r2(&self) -> Option<f64> {
        self.r.map(|r| r.norm_sqr())
    }

    pub fn abs_t2(&self) -> Option<f64> {
        self.t.map(|t| t.norm_sqr())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flag.is_some()).count()
    }

    /// Indices of strict local maxima of `Re t` among unflagged rows.
    pub fn transmission_peaks(&self) -> Vec<usize> {
        let re: Vec<Option<f64>> = self.rows.iter().map(|r| r.t.map(|t| t.re)).collect();
        (1..re.len().saturating_sub(1))
            .filter(|&i| match (re[i - 1], re[i], re[i + 1]) {
                (Some(a), Some(b), Some(c)) => b > a && b > c,
                _ => false,
            })
            .collect()
    }
}

/// `samples` equally spaced detunings from `min` to `max` inclusive.
pub fn detuning_grid(min: f64, max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || samples == 0 || (samples > 1 && max <= min) {
        return Err(Error::InvalidParameter(format!(
            "detuning grid needs finite min < max and at least one sample (got {min}, {max}, {samples})"
        )));
    }
    if samples == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (samples - 1) as f64;
    Ok((0..samples).map(|k| if k + 1 == samples { max } else { min + k as f64 * step }).collect())
}

/// Reflection and transmission over a detuning grid. Parameter errors abort;
/// rows that break a driven-response precondition are kept and flagged.
pub fn spectrum_scan(params: &SystemParams, spec: &BroadeningSpec, p: f64, grid: &[f64]) -> Result<SpectrumTable> {
    params.validate()?;
    ProbeConfig::new(Complex64::new(1.0, 0.0), 0.0, p)?;
    let rows = grid
        .iter()
        .map(|&delta_e| {
            let probe = ProbeConfig { beta0: Complex64::new(1.0, 0.0), delta_e, p };
            match reflection_transmission(params, spec, &probe) {
                Ok((r, t)) => Ok(SpectrumRow { delta_e, r: Some(r), t: Some(t), flag: None }),
                Err(e) if e.is_precondition() => {
                    Ok(SpectrumRow { delta_e, r: None, t: None, flag: Some(e.to_string()) })
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcForm {
    Reflection,
    Transmission,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcEstimate {
    pub value: f64,
    /// Imaginary part of the estimate; zero for resonant data.
    pub imaginary_residual: f64,
}

/// `pC` from resonant data: `(r - (κ₁-κ₂)/κ)/(r + 1)` or `1 - 2√(κ₁κ₂)/(κ t)`.
pub fn estimate_pc(value: Complex64, form: PcForm, kappa1: f64, kappa2: f64) -> Result<PcEstimate> {
    if !(kappa1 >= 0.0 && kappa2 >= 0.0 && kappa1 + kappa2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mirror rates must be non-negative with a positive sum (got {kappa1}, {kappa2})"
        )));
    }
    let kappa = kappa1 + kappa2;
    let z = match form {
        PcForm::Reflection => {
            let denom = value + 1.0;
            if denom.norm() == 0.0 {
                return Err(Error::Domain("r = -1 leaves pC undetermined".into()));
            }
            (value - (kappa1 - kappa2) / kappa) / denom
        }
        PcForm::Transmission => {
            if value.norm() == 0.0 {
                return Err(Error::Domain("t = 0 leaves pC undetermined".into()));
            }
            1.0 - 2.0 * (kappa1 * kappa2).sqrt() / (kappa * value)
        }
    };
    Ok(PcEstimate { value: z.re, imaginary_residual: z.im })
}

/// `∂S_z/∂t = -4p g²|a_c|²/Γ` on resonance.
pub fn sz_depletion_rate(p: f64, g_ens: f64, gamma: f64, photons: f64) -> f64 {
    -4.0 * p * g_ens * g_ens * photons / gamma
}

/// `(κ/κ₁)(1 - pC)²/(8|pC|) N`, the photon number the probe must stay well below.
pub fn photon_budget(kappa: f64, kappa1: f64, pc: f64, n: f64) -> Result<f64> {
    if pc == 0.0 {
        return Err(Error::Domain("pC = 0: the photon budget is unbounded".into()));
    }
    if !(kappa > 0.0 && kappa1 > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa and kappa1 must be positive (got {kappa}, {kappa1})")));
    }
    Ok(kappa / kappa1 * (1.0 - pc).powi(2) / (8.0 * pc.abs()) * n)
}

/// Rotating-frame steady state of a driven [`DriftModel`]: `a_c` and
/// `S_x⁽ᵐ⁾ - iS_y⁽ᵐ⁾` all oscillate as `e^{-iΔ_e t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenSteadyState {
    pub field: Complex64,
    pub spins: Vec<Complex64>,
}

impl DrivenSteadyState {
    /// Real quadrature means at time `t`.
    pub fn real_state(&self, delta_e: f64, t: f64) -> StateVector {
        let phase = Complex64::new(0.0, -delta_e * t).exp();
        let a = self.field * phase;
        let mut y = DVector::zeros(2 * self.spins.len() + 2);
        y[0] = SQRT_2 * a.re;
        y[1] = SQRT_2 * a.im;
        for (m, w) in self.spins.iter().enumerate() {
            let w = w * phase;
            y[2 + 2 * m] = w.re;
            y[3 + 2 * m] = -w.im;
        }
        y
    }
}

/// Solves `(K + iΔ_e) u + d = 0` using the arrow structure of `K`. The spins
/// follow the field as `w_m = -K_m0 u_0/(K_mm + iΔ_e)`.
pub fn driven_steady_state(model: &DriftModel, probe: &ProbeConfig) -> Result<DrivenSteadyState> {
    probe.validate()?;
    let shift = Complex64::new(0.0, probe.delta_e);
    let diag = model.complex_diagonal();
    let row = model.complex_field_row();
    let col = model.complex_spin_column();
    let scale = diag.iter().map(|d| d.norm()).fold(model.params().kappa, f64::max);
    let mut follow = Vec::with_capacity(col.len());
    let mut schur = diag[0] + shift;
    for m in 0..col.len() {
        let d = diag[m + 1] + shift;
        if d.norm() <= 1e-14 * scale {
            return Err(Error::Domain(format!(
                "sub-ensemble {m} is undamped and resonant with the drive; no steady state"
            )));
        }
        let ratio = -col[m] / d;
        schur += row[m] * ratio;
        follow.push(ratio);
    }
    if schur.norm() <= 1e-14 * scale {
        return Err(Error::Domain("driven response diverges at this detuning".into()));
    }
    let drive = 2.0 * model.params().kappa1.sqrt() * probe.beta0;
    let u0 = -drive / schur;
    Ok(DrivenSteadyState { field: u0 / SQRT_2, spins: follow.iter().map(|r| r * u0).collect() })
}

/// Integrates the driven mean equations, returning the state at each output time.
pub fn evolve_driven_mean(
    model: &DriftModel,
    probe: &ProbeConfig,
    y0: &StateVector,
    times: &[f64],
    tol: &Tolerances,
) -> Result<Vec<StateVector>> {
    probe.validate()?;
    if y0.len() != model.dim() {
        return Err(Error::InvalidParameter(format!(
            "initial state has length {} but the model needs {}",
            y0.len(),
            model.dim()
        )));
    }
    let gain = 2.0 * model.params().kappa1.sqrt();
    let (beta0, delta_e) = (probe.beta0, probe.delta_e);
    let mut out = Vec::with_capacity(times.len());
    integrate(
        |t, y, dy| {
            model.apply_into(y, dy);
            let beta = beta0 * Complex64::new(0.0, -delta_e * t).exp();
            dy[0] += gain * beta.re;
            dy[1] += gain * beta.im;
        },
        y0.as_slice().to_vec(),
        times,
        tol,
        |_| {},
        |_, _, y| {
            out.push(DVector::from_column_slice(y));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Total inversion drain `Σ_m √2 g_m ⟨S_x⁽ᵐ⁾P_c + S_y⁽ᵐ⁾X_c⟩`. Products of
/// means always count; with a covariance the symmetrized second moments
/// `γ/2` are added.
pub fn mean_field_drain(model: &DriftModel, y: &StateVector, gamma: Option<&CovarianceMatrix>) -> Result<f64> {
    let n = model.dim();
    if y.len() != n || gamma.is_some_and(|g| g.nrows() != n || g.ncols() != n) {
        return Err(Error::InvalidParameter("state or covariance does not match the model".into()));
    }
    let mut drain = 0.0;
    for (m, e) in model.grid().entries().iter().enumerate() {
        let (sx, sy) = (2 + 2 * m, 3 + 2 * m);
        let mut moment = y[sx] * y[1] + y[sy] * y[0];
        if let Some(g) = gamma {
            moment += 0.5 * (g[(sx, 1)] + g[(sy, 0)]);
        }
        drain += SQRT_2 * e.coupling * moment;
    }
    Ok(drain)
}

/// Drain of the undriven inverted two-mode steady state,
/// `4√2 (g/√N) ⟨δS_x δP_c⟩`, which reduces to `-4g²/((κ+Γ)(1-C))`.
pub fn homogeneous_steady_drain(kappa: f64, gamma: f64, g_ens: f64, n: f64) -> Result<f64> {
    let m = crate::analytics::steady_state_moments_hom(kappa, gamma, g_ens, n)?;
    Ok(SQRT_2 * g_ens / n.sqrt() * (m.cov_sx_pc + m.cov_sy_xc))
}
