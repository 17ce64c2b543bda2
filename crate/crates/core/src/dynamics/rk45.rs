//! Dormand–Prince 5(4) with first-same-as-last reuse and exact landing on
//! output times.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus embedded fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn rms_error(err: &[f64], y: &[f64], y_new: &[f64], tol: &Tolerances) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let scale = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / err.len().max(1) as f64).sqrt()
}

fn rms_scaled(v: &[f64], y: &[f64], tol: &Tolerances) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| (a / (tol.atol + tol.rtol * b.abs())).powi(2))
        .sum();
    (sum / v.len().max(1) as f64).sqrt()
}

/// Integrates `dy/dt = f(t, y)` from `times[0]`, calling `observe(i, t_i, y)` at
/// every output time (including the first). `post_step` may project each
/// accepted state, e.g. to restore a symmetry lost to rounding.
pub fn integrate<F, P, O>(
    mut rhs: F,
    y0: Vec<f64>,
    times: &[f64],
    tol: &Tolerances,
    mut post_step: P,
    mut observe: O,
) -> Result<Stats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
    O: FnMut(usize, f64, &[f64]) -> Result<()>,
{
    if times.is_empty() {
        return Ok(Stats::default());
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("output times must be finite and strictly increasing".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("initial state is not finite".into()));
    }

    let n = y0.len();
    let mut stats = Stats::default();
    let mut y = y0;
    let mut t = times[0];
    observe(0, t, &y)?;
    if times.len() == 1 || n == 0 {
        for (i, &ti) in times.iter().enumerate().skip(1) {
            observe(i, ti, &y)?;
        }
        return Ok(stats);
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    rhs(t, &y, &mut k1);
    stats.evaluations += 1;

    let span = times[times.len() - 1] - t;
    let mut h = {
        let d0 = rms_scaled(&y, &y, tol);
        let d1 = rms_scaled(&k1, &y, tol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for i in 0..n {
            stage[i] = y[i] + h0 * k1[i];
        }
        rhs(t + h0, &stage, &mut k2);
        stats.evaluations += 1;
        let diff: Vec<f64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
        let d2 = rms_scaled(&diff, &y, tol) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    };

    for (index, &target) in times.iter().enumerate().skip(1) {
        while t < target {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(Error::StepSize {
                    t,
                    step: h,
                    reason: format!("exceeded {} steps", tol.max_steps),
                });
            }
            let remaining = target - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepSize { t, step, reason: "step size underflow".into() });
            }

            macro_rules! combine {
                ($dst:expr, $($c:expr, $k:expr),+) => {
                    for i in 0..n {
                        $dst[i] = y[i] + step * (0.0 $(+ $c * $k[i])+);
                    }
                };
            }
            combine!(stage, A21, k1);
            rhs(t + C2 * step, &stage, &mut k2);
            combine!(stage, A31, k1, A32, k2);
            rhs(t + C3 * step, &stage, &mut k3);
            combine!(stage, A41, k1, A42, k2, A43, k3);
            rhs(t + C4 * step, &stage, &mut k4);
            combine!(stage, A51, k1, A52, k2, A53, k3, A54, k4);
            rhs(t + C5 * step, &stage, &mut k5);
            combine!(stage, A61, k1, A62, k2, A63, k3, A64, k4, A65, k5);
            rhs(t + step, &stage, &mut k6);
            combine!(y_new, B1, k1, B3, k3, B4, k4, B5, k5, B6, k6);
            rhs(t + step, &y_new, &mut k7);
            stats.evaluations += 6;

            for i in 0..n {
                err[i] = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let norm = rms_error(&err, &y, &y_new, tol);
            if !norm.is_finite() {
                return Err(Error::StepSize { t, step, reason: "non-finite error estimate".into() });
            }

            if norm <= 1.0 {
                stats.accepted += 1;
                t = if landing { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                post_step(&mut y);
                std::mem::swap(&mut k1, &mut k7);
                let factor = if norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A step shortened to land on an output time says nothing about the natural step.
                h = if landing { h.max(step * factor) } else { step * factor };
            } else {
                stats.rejected += 1;
                h = step * (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            }
        }
        observe(index, t, &y)?;
    }
    Ok(stats)
}
