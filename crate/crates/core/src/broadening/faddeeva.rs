//! The Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
//!
//! Evaluation is split into two regions of the upper half-plane:
//!
//! - `|z| < 10`: Weideman's rational expansion in `Z = (L + iz)/(L - iz)` with
//!   32 terms, relative error below 1e-12 up to the real axis.
//! - `|z| ≥ 10`: the Laplace continued fraction, which converges to machine
//!   precision with a handful of terms there.
//!
//! The lower half-plane follows from `w(z) = 2 exp(-z²) - w(-z)`, and negative
//! real parts from `w(-conj z) = conj w(z)`, so that identity holds bit-exactly.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Lowest imaginary part accepted by [`faddeeva`]; below this `exp(-z²)` overflows
/// quickly and the values are outside any physical use in this crate.
pub const MIN_IMAG: f64 = -10.0;

const WEIDEMAN_TERMS: usize = 32;
const CF_RADIUS: f64 = 10.0;
const CF_TERMS: usize = 24;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    scale: f64,
    coeffs: [f64; WEIDEMAN_TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let scale = (n as f64 / 2f64.sqrt()).sqrt();
        // Samples of exp(-t²)(L² + t²) on t = L tan(θ/2), θ = kπ/m; even in k.
        let sample = |k: usize| {
            let t = scale * (k as f64 * PI / (2 * m) as f64).tan();
            (-t * t).exp() * (scale * scale + t * t)
        };
        let samples: Vec<f64> = (0..m).map(sample).collect();
        let mut coeffs = [0.0; WEIDEMAN_TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let harmonic = (j + 1) as f64;
            let mut acc = samples[0];
            for (k, s) in samples.iter().enumerate().skip(1) {
                acc += 2.0 * s * (PI * k as f64 * harmonic / m as f64).cos();
            }
            *c = acc / (2 * m) as f64;
        }
        Weideman { scale, coeffs }
    })
}

fn weideman_eval(z: Complex64) -> Complex64 {
    let table = weideman();
    let l = Complex64::new(table.scale, 0.0);
    let iz = Complex64::i() * z;
    let denom = l - iz;
    let big_z = (l + iz) / denom;
    let poly = table
        .coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * big_z + c);
    2.0 * poly / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let mut tail = Complex64::new(0.0, 0.0);
    for k in (1..=CF_TERMS).rev() {
        tail = (0.5 * k as f64) / (z - tail);
    }
    Complex64::i() * FRAC_1_SQRT_PI / (z - tail)
}

/// Upper half-plane with non-negative real part.
fn first_quadrant(z: Complex64) -> Complex64 {
    if z.norm() >= CF_RADIUS {
        continued_fraction(z)
    } else {
        weideman_eval(z)
    }
}

fn upper_half(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        first_quadrant(Complex64::new(-z.re, z.im)).conj()
    } else {
        first_quadrant(z)
    }
}

pub(crate) fn faddeeva_unchecked(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        upper_half(z)
    } else {
        2.0 * (-z * z).exp() - upper_half(-z)
    }
}

/// Evaluates the Faddeeva function.
///
/// Rejects non-finite input and `Im z < -10`.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("faddeeva argument {z} is not finite")));
    }
    if z.im < MIN_IMAG {
        return Err(Error::Domain(format!(
            "faddeeva argument {z} has imaginary part below {MIN_IMAG}"
        )));
    }
    Ok(faddeeva_unchecked(z))
}

/// `w'(z) = -2z w(z) + 2i/√π`, given `w(z)`.
pub fn faddeeva_derivative(z: Complex64, w: Complex64) -> Complex64 {
    -2.0 * z * w + Complex64::new(0.0, 2.0 * FRAC_1_SQRT_PI)
}
