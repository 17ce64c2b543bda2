//! Randomized invariants across the public API.

use cavspin::analytics::{cooperativity, homogeneous_eigenvalues, lorentzian_kick_response, stability_report};
use cavspin::broadening::{characteristic_width, density, discretize, faddeeva, BroadeningSpec, Family};
use cavspin::dynamics::{evolve_moments, uniform_times, PropagationOptions, Tolerances};
use cavspin::model::{build_drift_matrix, SystemParams};
use cavspin::probing::{estimate_pc, reflection_transmission, spectrum_scan, PcForm, ProbeConfig};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Homogeneous), Just(Family::Lorentzian), Just(Family::Gaussian)]
}

fn spec_of(family: Family, width: f64) -> BroadeningSpec {
    BroadeningSpec::new(family, if family == Family::Homogeneous { 0.0 } else { width }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn faddeeva_reflection_identity(x in -30.0..30.0f64, y in -4.0..30.0f64) {
        let z = Complex64::new(x, y);
        let a = faddeeva(-z.conj()).unwrap();
        let b = faddeeva(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
    }

    #[test]
    fn density_is_even(width in 0.01..10.0f64, delta in -50.0..50.0f64, lorentzian in any::<bool>()) {
        let spec = if lorentzian { BroadeningSpec::lorentzian(width) } else { BroadeningSpec::gaussian(width) }.unwrap();
        prop_assert_eq!(density(&spec, delta).unwrap(), density(&spec, -delta).unwrap());
    }

    #[test]
    fn grids_are_mirror_symmetric(
        half in 1usize..150,
        width in 0.05..5.0f64,
        g in 0.1..10.0f64,
        n in 1e3..1e9f64,
        lorentzian in any::<bool>(),
    ) {
        let m = 2 * half + 1;
        let spec = if lorentzian { BroadeningSpec::lorentzian(width) } else { BroadeningSpec::gaussian(width) }.unwrap();
        let grid = discretize(&spec, m, g, n).unwrap();
        let e = grid.entries();
        prop_assert_eq!(e.len(), m);
        prop_assert!((grid.total_spins() / n - 1.0).abs() < 1e-12);
        let coupling: f64 = e.iter().map(|s| s.coupling * s.coupling * s.spins).sum();
        prop_assert!((coupling / (g * g) - 1.0).abs() < 1e-12);
        prop_assert!(e.windows(2).all(|w| w[0].detuning < w[1].detuning));
        for k in 0..m {
            let (a, b) = (&e[k], &e[m - 1 - k]);
            if lorentzian {
                prop_assert!((a.detuning + b.detuning).abs() <= 1e-12 * a.detuning.abs().max(1.0));
            } else {
                prop_assert_eq!(a.detuning, -b.detuning);
            }
            prop_assert!((a.spins - b.spins).abs() <= 1e-12 * a.spins);
        }
    }

    #[test]
    fn cooperativity_decides_stability(
        kappa in 0.01..100.0f64,
        gamma_perp in 0.0..5.0f64,
        g in 0.0..20.0f64,
        fam in family(),
        width in 0.01..5.0f64,
    ) {
        let spec = spec_of(fam, width);
        let gamma = characteristic_width(&spec, gamma_perp);
        prop_assume!(gamma.is_ok());
        let params = SystemParams::symmetric(kappa, gamma_perp, g).unwrap();
        let report = stability_report(&params, &spec).unwrap();
        prop_assume!((report.cooperativity - 1.0).abs() > 1e-9);
        prop_assert_eq!(report.stable, report.lambda_plus.re < 0.0);
        prop_assert!((report.cooperativity - g * g / (kappa * report.gamma)).abs() <= 1e-12 * report.cooperativity.max(1.0));
    }

    #[test]
    fn kick_response_is_linear_in_amplitude(alpha in -5.0..5.0f64, c in 0.01..3.0f64, t in 0.0..10.0f64) {
        let (gamma, g) = (1.0, 2.0);
        let kappa = g * g / (c * gamma);
        let one = lorentzian_kick_response(1.0, kappa, gamma, g, t);
        let scaled = lorentzian_kick_response(alpha, kappa, gamma, g, t);
        prop_assert!((scaled - alpha * one).norm() <= 1e-13 * (alpha * one).norm().max(1e-300));
    }

    #[test]
    fn pc_round_trips(
        kappa1 in 0.1..10.0f64,
        kappa2 in 0.1..10.0f64,
        gamma_perp in 0.01..3.0f64,
        fam in family(),
        width in 0.05..5.0f64,
        target in 0.0..0.99f64,
        inverted in any::<bool>(),
    ) {
        let spec = spec_of(fam, width);
        let gamma = characteristic_width(&spec, gamma_perp).unwrap();
        let p = if inverted { 1.0 } else { -1.0 };
        let c_target = if inverted { target } else { 30.0 * target };
        let g = (c_target * (kappa1 + kappa2) * gamma).sqrt();
        let params = SystemParams::new(kappa1, kappa2, gamma_perp, g, 0.0).unwrap();
        let c = cooperativity(g, params.kappa, gamma);
        let probe = ProbeConfig::new(Complex64::new(0.7, 0.1), 0.0, p).unwrap();
        let (r, t) = reflection_transmission(&params, &spec, &probe).unwrap();
        for (v, form) in [(r, PcForm::Reflection), (t, PcForm::Transmission)] {
            let est = estimate_pc(v, form, kappa1, kappa2).unwrap();
            prop_assert!((est.value - p * c).abs() <= 1e-10);
            prop_assert!(est.imaginary_residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn spectrum_is_symmetric_for_symmetric_lines(
        kappa in 0.5..20.0f64,
        gamma_perp in 0.05..2.0f64,
        g in 0.0..10.0f64,
        fam in family(),
        width in 0.05..5.0f64,
        span in 0.5..30.0f64,
    ) {
        let spec = spec_of(fam, width);
        let params = SystemParams::symmetric(kappa, gamma_perp, g).unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| span * (k as f64 / 10.0 - 1.0)).collect();
        let table = spectrum_scan(&params, &spec, -1.0, &grid).unwrap();
        let n = table.rows.len();
        for k in 0..n {
            let (a, b) = (table.rows[k].t.unwrap(), table.rows[n - 1 - k].t.unwrap());
            prop_assert!((a.re - b.re).abs() <= 1e-12 && (a.norm() - b.norm()).abs() <= 1e-12);
            let sum = table.rows[k].abs_r2().unwrap() + table.rows[k].abs_t2().unwrap();
            prop_assert!(sum <= 1.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_propagation_is_linear(
        scale in prop_oneof![-8.0..-0.125f64, 0.125..8.0f64],
        kappa in 0.5..5.0f64,
        g in 0.0..3.0f64,
        seed in proptest::collection::vec(-1.0..1.0f64, 12),
    ) {
        let params = SystemParams::symmetric(kappa, 0.3, g).unwrap();
        let grid = discretize(&BroadeningSpec::gaussian(0.1).unwrap(), 5, g, 1e4).unwrap();
        let model = build_drift_matrix(&params, &grid, 1.0).unwrap();
        let y0 = DVector::from_vec(seed);
        let times = uniform_times(2.0, 11).unwrap();
        // The absolute tolerance makes step selection scale-dependent; integrate
        // tightly enough that the propagator, not the step sequence, is compared.
        let options = PropagationOptions {
            tolerances: Tolerances { rtol: 1e-12, atol: 1e-15, ..Tolerances::default() },
            ..PropagationOptions::default()
        };
        let base = evolve_moments(&model, Some(&y0), None, &times, &options).unwrap();
        let scaled = evolve_moments(&model, Some(&(scale * &y0)), None, &times, &options).unwrap();
        for (a, b) in base.means.iter().zip(&scaled.means) {
            let diff = (scale * a - b).amax();
            prop_assert!(diff <= 1e-12 * (scale * a).amax().max(1.0), "{diff:e}");
        }
    }

    #[test]
    fn two_mode_eigenvalues_solve_characteristic_equation(
        kappa in 0.01..50.0f64,
        gamma in 0.01..50.0f64,
        g in 0.0..50.0f64,
    ) {
        let c = cooperativity(g, kappa, gamma);
        let (lp, lm) = homogeneous_eigenvalues(kappa, gamma, c);
        for l in [lp, lm] {
            let residual = ((l + kappa) * (l + gamma) - g * g).norm();
            prop_assert!(residual <= 1e-10 * (kappa + gamma + g).powi(2));
        }
    }
}
