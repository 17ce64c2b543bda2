//! Spin-frequency distributions and their discretization into sub-ensembles.
//!
//! A distribution enters the dynamics only through its characteristic width
//! `Γ`, defined by `1/Γ = ∫ f(Δ) dΔ / (γ⊥ + iΔ)`, and, for simulations,
//! through a finite symmetric grid of sub-ensembles `(Δ_m, g_m, N_m)`.

pub mod faddeeva;

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use faddeeva::{faddeeva, faddeeva_derivative};

/// Half-span of the uniform Gaussian grid, in standard deviations.
pub const GAUSSIAN_SPAN_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Homogeneous,
    Lorentzian,
    Gaussian,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Homogeneous => "homogeneous",
            Family::Lorentzian => "lorentzian",
            Family::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "homogeneous" => Ok(Family::Homogeneous),
            "lorentzian" => Ok(Family::Lorentzian),
            "gaussian" => Ok(Family::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown broadening family `{other}` (expected homogeneous, lorentzian or gaussian)"
            ))),
        }
    }
}

/// A distribution of spin detunings.
///
/// `width` is the FWHM `w` for a Lorentzian, the standard deviation `σ_Δ` for a
/// Gaussian, and zero for the homogeneous (delta-function) case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadeningSpec {
    family: Family,
    width: f64,
}

impl BroadeningSpec {
    pub fn homogeneous() -> Self {
        Self { family: Family::Homogeneous, width: 0.0 }
    }

    pub fn lorentzian(fwhm: f64) -> Result<Self> {
        Self::new(Family::Lorentzian, fwhm)
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(Family::Gaussian, sigma)
    }

    pub fn new(family: Family, width: f64) -> Result<Self> {
        match family {
            Family::Homogeneous if width != 0.0 => Err(Error::InvalidParameter(format!(
                "homogeneous broadening takes no width (got {width})"
            ))),
            Family::Lorentzian | Family::Gaussian if !(width.is_finite() && width > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "{} width must be positive and finite (got {width})",
                    family.name()
                )))
            }
            _ => Ok(Self { family, width }),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

/// Pointwise density `f(Δ)`. A homogeneous ensemble is a point mass and has none.
pub fn density(spec: &BroadeningSpec, delta: f64) -> Result<f64> {
    match spec.family {
        Family::Homogeneous => Err(Error::InvalidParameter(
            "a homogeneous distribution is a point mass and has no density".into(),
        )),
        Family::Lorentzian => {
            let half = 0.5 * spec.width;
            Ok(half / PI / (delta * delta + half * half))
        }
        Family::Gaussian => {
            let s = spec.width;
            Ok((-0.5 * (delta / s).powi(2)).exp() / ((2.0 * PI).sqrt() * s))
        }
    }
}

/// Characteristic width `Γ`, the inverse of `∫ f(Δ) dΔ / (γ⊥ + iΔ)`.
pub fn characteristic_width(spec: &BroadeningSpec, gamma_perp: f64) -> Result<f64> {
    if !(gamma_perp.is_finite() && gamma_perp >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dephasing rate must be non-negative (got {gamma_perp})"
        )));
    }
    match spec.family {
        Family::Homogeneous => {
            if gamma_perp == 0.0 {
                Err(Error::InvalidParameter(
                    "characteristic width of a homogeneous ensemble needs γ⊥ > 0".into(),
                ))
            } else {
                Ok(gamma_perp)
            }
        }
        Family::Lorentzian => Ok(0.5 * spec.width + gamma_perp),
        Family::Gaussian => {
            let sigma = spec.width;
            let z = Complex64::new(0.0, gamma_perp / (2f64.sqrt() * sigma));
            let w = faddeeva(z)?;
            let width = FRAC_2_PI.sqrt() * sigma / w;
            debug_assert!(width.im.abs() < 1e-12 * width.re);
            Ok(width.re)
        }
    }
}

/// `∫ f(Δ) dΔ / (γ⊥ + i(Δ - Δ_e))`, the spin susceptibility seen by a drive at
/// detuning `Δ_e`. At `Δ_e = 0` this is `1/Γ`.
pub fn susceptibility(spec: &BroadeningSpec, gamma_perp: f64, delta_e: f64) -> Result<Complex64> {
    let denom = |rate: f64| Complex64::new(rate, -delta_e).inv();
    match spec.family {
        Family::Homogeneous => {
            if gamma_perp == 0.0 && delta_e == 0.0 {
                return Err(Error::InvalidParameter(
                    "homogeneous susceptibility diverges at γ⊥ = 0 on resonance".into(),
                ));
            }
            Ok(denom(gamma_perp))
        }
        Family::Lorentzian => Ok(denom(0.5 * spec.width + gamma_perp)),
        Family::Gaussian => {
            let sigma = spec.width;
            let z = Complex64::new(delta_e, gamma_perp) / (2f64.sqrt() * sigma);
            Ok((0.5 * PI).sqrt() * faddeeva(z)? / sigma)
        }
    }
}

/// One homogeneous group of spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubEnsemble {
    pub detuning: f64,
    pub coupling: f64,
    pub spins: f64,
}

/// A finite, detuning-symmetric set of sub-ensembles sorted by detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SubEnsembleGrid {
    entries: Vec<SubEnsemble>,
    total_spins: f64,
    g_ens: f64,
    spec: BroadeningSpec,
}

impl SubEnsembleGrid {
    pub fn entries(&self) -> &[SubEnsemble] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_spins(&self) -> f64 {
        self.total_spins
    }

    pub fn g_ens(&self) -> f64 {
        self.g_ens
    }

    pub fn spec(&self) -> &BroadeningSpec {
        &self.spec
    }

    /// Largest `|Δ_m|` on the grid.
    pub fn span(&self) -> f64 {
        self.entries.iter().map(|e| e.detuning.abs()).fold(0.0, f64::max)
    }

    /// Spacing of the two nodes closest to zero detuning, the densest part of
    /// every grid built here. `None` for a single sub-ensemble.
    pub fn central_spacing(&self) -> Option<f64> {
        if self.entries.len() < 2 {
            return None;
        }
        let mid = self.entries.len() / 2;
        let lo = if self.entries.len() % 2 == 1 { mid } else { mid - 1 };
        Some(self.entries[lo + 1].detuning - self.entries[lo].detuning)
    }

    /// Time after which the discrete spectrum rephases and the ensemble
    /// "revives": `2π / δΔ` with `δΔ` the central spacing.
    pub fn revival_time(&self) -> f64 {
        self.central_spacing().map_or(f64::INFINITY, |d| 2.0 * PI / d)
    }

    /// `Σ_m g_m² N_m / (γ⊥ + iΔ_m)`, the discrete counterpart of `g_ens²/Γ`.
    pub fn discrete_response(&self, gamma_perp: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|e| e.coupling * e.coupling * e.spins / Complex64::new(gamma_perp, e.detuning))
            .sum()
    }

    /// Characteristic width recovered from the grid, `g_ens² / Re Σ g_m² N_m / (γ⊥ + iΔ_m)`.
    pub fn discrete_characteristic_width(&self, gamma_perp: f64) -> f64 {
        self.g_ens * self.g_ens / self.discrete_response(gamma_perp).re
    }
}

/// Splits a distribution into `m` sub-ensembles carrying `n` spins with
/// ensemble coupling `g_ens`.
///
/// Gaussian nodes are uniform on `±6σ` with trapezoidal weights; Lorentzian
/// nodes sit at the mid-quantiles `Δ = (w/2) tan(π(u - ½))`, `u = (k - ½)/m`,
/// each carrying weight `1/m`. A homogeneous ensemble always gives one entry.
/// Broadened grids need odd `m ≥ 3` so that `Δ = 0` is a node and the grid is
/// symmetric.
pub fn discretize(spec: &BroadeningSpec, m: usize, g_ens: f64, n: f64) -> Result<SubEnsembleGrid> {
    if !(g_ens.is_finite() && g_ens >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ensemble coupling must be non-negative (got {g_ens})"
        )));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spin number must be positive (got {n})"
        )));
    }
    if spec.family != Family::Homogeneous && (m < 3 || m % 2 == 0) {
        return Err(Error::InvalidParameter(format!(
            "a broadened grid needs an odd number of sub-ensembles ≥ 3 (got {m})"
        )));
    }

    // Nodes and weights for the non-negative half, index 0 at Δ = 0.
    let half = m / 2;
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match spec.family {
        Family::Homogeneous => (vec![0.0], vec![1.0]),
        Family::Gaussian => {
            let sigma = spec.width;
            let step = GAUSSIAN_SPAN_SIGMAS * sigma / half as f64;
            (0..=half)
                .map(|k| {
                    let delta = k as f64 * step;
                    let mut weight = (-0.5 * (delta / sigma).powi(2)).exp();
                    if k == half {
                        weight *= 0.5;
                    }
                    (delta, weight)
                })
                .unzip()
        }
        Family::Lorentzian => {
            let half_width = 0.5 * spec.width;
            (0..=half)
                .map(|k| {
                    // u - ½ = k/m for the node k places above the centre.
                    let delta = half_width * (PI * k as f64 / m as f64).tan();
                    (delta, 1.0)
                })
                .unzip()
        }
    };

    let total: f64 = weights[0] + 2.0 * weights[1..].iter().sum::<f64>();
    let coupling = g_ens / n.sqrt();
    let entry = |k: usize, sign: f64| {
        let weight = weights[k] / total;
        SubEnsemble { detuning: sign * nodes[k], coupling, spins: n * weight }
    };

    let mut entries: Vec<SubEnsemble> = (1..nodes.len()).rev().map(|k| entry(k, -1.0)).collect();
    entries.push(SubEnsemble { detuning: 0.0, ..entry(0, 1.0) });
    entries.extend((1..nodes.len()).map(|k| entry(k, 1.0)));

    Ok(SubEnsembleGrid { entries, total_spins: n, g_ens, spec: *spec })
}
