//! Closed-form and semi-analytic results: cooperativity and stability, the
//! two-mode eigenvalues, the Lorentzian kick response, Gaussian poles, the
//! near-threshold and weak-coupling laws, and homogeneous steady-state moments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::broadening::{characteristic_width, faddeeva, faddeeva_derivative, BroadeningSpec};
use crate::error::{Error, Result};
use crate::model::SystemParams;

const POLE_MAX_ITER: usize = 100;

/// `C = g²/(κΓ)`.
pub fn cooperativity(g_ens: f64, kappa: f64, gamma: f64) -> f64 {
    g_ens * g_ens / (kappa * gamma)
}

/// `κ_c = g²/Γ`, the cavity decay at which the inverted system turns unstable.
pub fn critical_kappa(g_ens: f64, gamma: f64) -> f64 {
    g_ens * g_ens / gamma
}

/// `λ± = -(κ+Γ)/2 · (1 ∓ √(1 + 4(C-1)κΓ/(κ+Γ)²))` for inverted spins.
pub fn homogeneous_eigenvalues(kappa: f64, gamma: f64, c: f64) -> (Complex64, Complex64) {
    let s = kappa + gamma;
    let root = Complex64::new(1.0 + 4.0 * (c - 1.0) * kappa * gamma / (s * s), 0.0).sqrt();
    (-0.5 * s * (1.0 - root), -0.5 * s * (1.0 + root))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub gamma: f64,
    pub kappa_c: f64,
    pub cooperativity: f64,
    /// `C < 1`.
    pub stable: bool,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

/// Stability of the inverted system. The eigenvalues are exact for homogeneous
/// and Lorentzian broadening and only indicative for Gaussian.
pub fn stability_report(params: &SystemParams, spec: &BroadeningSpec) -> Result<StabilityReport> {
    params.validate()?;
    let gamma = characteristic_width(spec, params.gamma_perp)?;
    let c = cooperativity(params.g_ens, params.kappa, gamma);
    let (lambda_plus, lambda_minus) = homogeneous_eigenvalues(params.kappa, gamma, c);
    Ok(StabilityReport {
        gamma,
        kappa_c: critical_kappa(params.g_ens, gamma),
        cooperativity: c,
        stable: c < 1.0,
        lambda_plus,
        lambda_minus,
    })
}

/// `sinh(x)/x`, accurate near zero.
fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `⟨a_c(t)⟩` after a kick `⟨a_c⟩ → α` of an inverted Lorentzian (or
/// homogeneous) ensemble:
/// `α[(λ₊+Γ)e^{λ₊t} - (λ₋+Γ)e^{λ₋t}]/(λ₊-λ₋)`, zero for `t < 0`.
///
/// Near the degenerate point `λ₊ = λ₋` it is evaluated as
/// `α e^{λ̄t}[cosh(ht) + (λ̄+Γ) t sinhc(ht)]` with `λ± = λ̄ ± h`, which is also
/// the limit at `h = 0`. Elsewhere the two exponentials are kept apart so that
/// large `κt` cannot overflow `cosh`.
pub fn lorentzian_kick_response(alpha: f64, kappa: f64, gamma: f64, g_ens: f64, t: f64) -> Complex64 {
    if t < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mean = -0.5 * (kappa + gamma);
    let c = cooperativity(g_ens, kappa, gamma);
    let (lp, lm) = homogeneous_eigenvalues(kappa, gamma, c);
    let h = lp - mean;
    let ht = h * t;
    if ht.norm() < 0.5 {
        return alpha * (mean * t).exp() * (ht.cosh() + (mean + gamma) * t * sinhc(ht));
    }
    alpha * ((lp + gamma) * (lp * t).exp() - (lm + gamma) * (lm * t).exp()) / (lp - lm)
}

/// `F(λ) = λ + κ - √(π/2)(g²/σ) w(z)` with `z = i(λ + γ⊥)/(√2σ)` and its derivative.
fn gaussian_pole_function(params: &SystemParams, sigma: f64, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    let scale = (0.5 * PI).sqrt() * params.g_ens * params.g_ens / sigma;
    let dz = Complex64::new(0.0, 1.0 / (2f64.sqrt() * sigma));
    let z = (lambda + params.gamma_perp) * dz;
    let w = faddeeva(z)?;
    let f = lambda + params.kappa - scale * w;
    let df = 1.0 - scale * faddeeva_derivative(z, w) * dz;
    Ok((f, df))
}

/// Residual `|F(λ)|` of the Gaussian pole condition.
pub fn gaussian_pole_residual(params: &SystemParams, sigma: f64, lambda: Complex64) -> Result<f64> {
    Ok(gaussian_pole_function(params, sigma, lambda)?.0.norm())
}

/// `dF/dλ` at `λ`; `α e^{λt}/F'(λ)` is the pole's contribution to the kick response.
pub fn gaussian_pole_derivative(params: &SystemParams, sigma: f64, lambda: Complex64) -> Result<Complex64> {
    Ok(gaussian_pole_function(params, sigma, lambda)?.1)
}

/// Root of the Gaussian pole condition for inverted spins, found by damped
/// Newton from `seed` with a secant step when the derivative vanishes.
/// Converges to `|F| ≤ 1e-10 κ`.
pub fn gaussian_pole(params: &SystemParams, sigma: f64, seed: Complex64) -> Result<Complex64> {
    params.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("Gaussian width must be positive (got {sigma})")));
    }
    if !(seed.re.is_finite() && seed.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("pole seed {seed} is not finite")));
    }
    let tol = 1e-10 * params.kappa;
    let mut lambda = seed;
    let (mut f, mut df) = gaussian_pole_function(params, sigma, lambda)?;
    let mut previous: Option<(Complex64, Complex64)> = None;
    let mut iterates = vec![lambda];
    for _ in 0..POLE_MAX_ITER {
        if f.norm() <= tol {
            return Ok(lambda);
        }
        let step = if df.norm() > 1e-300 {
            f / df
        } else if let Some((l0, f0)) = previous.filter(|(_, f0)| *f0 != f) {
            f * (lambda - l0) / (f - f0)
        } else {
            return Err(Error::NonConvergence { iterates });
        };
        // Halve the step until the residual drops.
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = lambda - damping * step;
            if let Ok((fc, dfc)) = gaussian_pole_function(params, sigma, candidate) {
                if fc.norm() < f.norm() {
                    accepted = Some((candidate, fc, dfc));
                    break;
                }
            }
            damping *= 0.5;
        }
        let Some((next, fn_, dfn)) = accepted else {
            return Err(Error::NonConvergence { iterates });
        };
        previous = Some((lambda, f));
        lambda = next;
        f = fn_;
        df = dfn;
        iterates.push(lambda);
    }
    if f.norm() <= tol {
        Ok(lambda)
    } else {
        Err(Error::NonConvergence { iterates })
    }
}

/// Seed for the slow Gaussian pole: the two-mode `λ₊` with the Gaussian `Γ`.
pub fn gaussian_pole_seed(params: &SystemParams, sigma: f64) -> Result<Complex64> {
    let report = stability_report(params, &BroadeningSpec::gaussian(sigma)?)?;
    Ok(report.lambda_plus)
}

/// Seed for the fast Gaussian pole: the two-mode `λ₋` with `Γ = γ⊥`.
pub fn gaussian_fast_pole_seed(params: &SystemParams) -> Complex64 {
    let gamma = params.gamma_perp;
    let c = if gamma > 0.0 { cooperativity(params.g_ens, params.kappa, gamma) } else { 0.0 };
    homogeneous_eigenvalues(params.kappa, gamma, c).1
}

/// Near-threshold growth rate
/// `(κ_c-κ)/(1+g²/σ²) + √(π/8)(g²/σ³)(κ_c-κ)²/(1+g²/σ²)³`.
pub fn threshold_rate_approx(kappa: f64, kappa_c: f64, sigma: f64, g_ens: f64) -> f64 {
    let d = kappa_c - kappa;
    let q = 1.0 + g_ens * g_ens / (sigma * sigma);
    d / q + (PI / 8.0).sqrt() * g_ens * g_ens / sigma.powi(3) * d * d / q.powi(3)
}

/// Weak-coupling kick response `α e^{-κt} + (αg²/κ²) e^{-σ²t²/2 - γ⊥t}`.
pub fn weak_coupling_response(alpha: f64, params: &SystemParams, sigma: f64, t: f64) -> f64 {
    let SystemParams { kappa, gamma_perp, g_ens, .. } = *params;
    alpha * (-kappa * t).exp()
        + alpha * g_ens * g_ens / (kappa * kappa) * (-0.5 * sigma * sigma * t * t - gamma_perp * t).exp()
}

/// Steady second moments of an inverted ensemble with two-mode dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousMoments {
    pub var_x_c: f64,
    pub var_p_c: f64,
    pub var_s_x: f64,
    pub var_s_y: f64,
    /// `⟨δS_x δP_c⟩`.
    pub cov_sx_pc: f64,
    /// `⟨δS_y δX_c⟩`.
    pub cov_sy_xc: f64,
}

/// Steady variances and cross moments for `C < 1`.
pub fn steady_state_moments_hom(kappa: f64, gamma: f64, g_ens: f64, n: f64) -> Result<HomogeneousMoments> {
    for (name, v) in [("kappa", kappa), ("gamma", gamma), ("spin number", n)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")));
        }
    }
    let c = cooperativity(g_ens, kappa, gamma);
    if c >= 1.0 {
        return Err(Error::Unstable(format!(
            "C = {c} ≥ 1: the variances diverge and no steady state exists"
        )));
    }
    let skew = c * (kappa - gamma) / (kappa + gamma);
    let field = 0.5 * (1.0 - skew) / (1.0 - c);
    let spin = n * (1.0 + skew) / (1.0 - c);
    let cross = -(0.5 * n).sqrt() * 2.0 * g_ens / ((kappa + gamma) * (1.0 - c));
    Ok(HomogeneousMoments {
        var_x_c: field,
        var_p_c: field,
        var_s_x: spin,
        var_s_y: spin,
        cov_sx_pc: cross,
        cov_sy_xc: cross,
    })
}
