use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C;
use photonic_kondo::bloch::{bloch_evolve, stationary_bloch, stationary_purity, BlochVector};
use photonic_kondo::correlators::{abc_coefficients, abc_stationary, resolved_closed_form, unresolved_closed_form};
use photonic_kondo::model::DrivenConfig;
use photonic_kondo::oracle::{integrate_rk4, richardson_check, richardson_check_with_step};
use photonic_kondo::sampling::{config_with, random_config};
use photonic_kondo::spectra::{c0_inelastic, inelastic_density, vector_density};
use photonic_kondo::validate::{bloch_system, resolved_system, simpson, unresolved_system};
use photonic_kondo::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs(seed: u64, n: usize) -> Vec<DrivenConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_config(&mut rng)).collect()
}

#[test]
fn abc_from_basis_expansion() {
    let mut tested = 0;
    for config in configs(10, 200) {
        let s2 = config.sin_psi().powi(2);
        if config.sin_psi() <= 0.1 {
            continue;
        }
        tested += 1;
        let c = config.cos_psi();
        let i = C::i();
        for tau in [0.0, 0.3, 1.7, 6.0].map(|t| t / config.gamma()) {
            let u = unresolved_closed_form(&config, tau).unwrap();
            let r = resolved_closed_form(&config, tau).unwrap();
            let a = (2.0 * r.c_clcl - c * (u.c_clh + r.c_hcl) - i * (u.b_cl - c * u.b_h)) / s2 - u.a;
            let b = (u.c_clh + r.c_hcl - 2.0 * c * r.c_clcl - i * (u.b_h - c * u.b_cl)) / s2;
            let cc = (r.e_r + r.e_l - i * (u.c_clh - r.c_hcl)) / s2;
            let abc = abc_coefficients(&config, tau).unwrap();
            for (x, y) in [(a, abc.a), (b, abc.b), (cc, abc.c)] {
                assert!((x - y).norm() < 1e-10 / s2, "psi {} tau {tau}: {x} vs {y}", config.psi());
            }
        }
    }
    assert!(tested > 100);
}

#[test]
fn unresolved_combination_term_by_term() {
    for config in configs(11, 100) {
        let lam = config.lambda().unwrap();
        let (c, s) = (config.cos_psi(), config.sin_psi());
        let l = 1.0 + lam * lam;
        let k = lam * s * s / l;
        let constant = 0.25 * (1.0 + lam * lam * c * c) / l;
        let s_st = stationary_bloch(&config).unwrap().s();
        assert!((constant - s_st.norm_squared()).abs() < 1e-14);
        assert!((constant - (2.0 * stationary_purity(&config).unwrap() - 1.0) / 4.0).abs() < 1e-14);
        let half = 0.5 * config.psi();
        for tau in [0.0, 0.2, 1.0, 4.0].map(|t| t / config.gamma()) {
            let u = unresolved_closed_form(&config, tau).unwrap();
            let (g, om) = (config.gamma(), config.omega());
            let e = |rate: C| (-rate * tau).exp();
            let expected = C::from(constant)
                + 0.25 * k * C::new(lam, c) * e(C::from(g))
                + 0.25 * k * C::new(lam, -half.cos().powi(2)) * e(C::new(g, -om))
                + 0.25 * k * C::new(lam, half.sin().powi(2)) * e(C::new(g, om));
            assert!((u.a + C::i() * u.b_cl - expected).norm() < 1e-12);
        }
    }
}

/// Amplitudes of the three decaying exponentials in a function known to
/// be c∞ + Σ c_j e^{s_j τ}, from three samples.
fn exponential_amplitudes(rates: [C; 3], taus: [f64; 3], values: [C; 3]) -> [C; 3] {
    let m = Matrix3::from_fn(|r, k| (rates[k] * taus[r]).exp());
    let rhs = Vector3::new(values[0], values[1], values[2]);
    let x = m.lu().solve(&rhs).unwrap();
    [x[0], x[1], x[2]]
}

#[test]
fn cross_term_of_resolved_spectrum_from_time_domain() {
    for config in configs(12, 60) {
        if config.sin_psi() < 0.05 {
            continue;
        }
        let (g, om) = (config.gamma(), config.omega());
        let rates = [C::from(-g), C::new(-g, om), C::new(-g, -om)];
        let dt = 0.4 / om.max(g);
        let taus = [0.0, dt, 2.0 * dt];
        let inf = abc_stationary(&config).unwrap().c;
        let vals = taus.map(|t| abc_coefficients(&config, t).unwrap().c - inf);
        let amps = exponential_amplitudes(rates, taus, vals);
        // the fit must reproduce the closed form elsewhere
        for t in [0.7 / g, 3.1 / g] {
            let fit: C = amps.iter().zip(&rates).map(|(a, s)| a * (s * t).exp()).sum();
            assert!((fit + inf - abc_coefficients(&config, t).unwrap().c).norm() < 1e-9);
        }
        let w = config.n_cl().cross(&config.n_h());
        let axis = w / w.norm();
        let pref = 0.5 * config.f() * config.phase().sin_half().powi(2) * w.norm();
        for nu in [-3.0, -1.2, -1.0, -0.4, 0.0, 0.3, 1.0, 2.5] {
            let transform: C = amps.iter().zip(&rates).map(|(a, s)| a / (C::new(0.0, nu * om) - s)).sum();
            let from_time = pref * 2.0 * transform.re;
            let closed = axis.dot(&vector_density(&config, nu).unwrap());
            let scale = pref / g;
            assert!((from_time - closed).abs() < 1e-9 * scale, "nu {nu}: {from_time} vs {closed}");
        }
    }
}

#[test]
fn spectrum_inverts_back_to_time_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..6 {
        let lam = photonic_kondo::sampling::log_uniform(&mut rng, 0.3, 20.0);
        let psi = rng.random_range(0.2..PI - 0.2);
        let config = config_with(lam, psi).unwrap();
        let tau = 2.0 / config.gamma();
        let om = config.omega();
        let width = 400.0 / lam + 20.0;
        let intervals = (2.0 * width * 40.0 * lam).ceil() as usize;
        let inverse = simpson(
            |nu| C::from_polar(1.0, nu * om * tau) * inelastic_density(&config, nu).unwrap(),
            -width,
            width,
            intervals,
        ) * (om / (2.0 * PI));
        let direct = c0_inelastic(&config, tau).unwrap();
        let scale = c0_inelastic(&config, 0.0).unwrap().norm();
        assert!((inverse - direct).norm() < 1e-4 * scale, "lam {lam}: {inverse} vs {direct}");
    }
}

#[test]
fn stiff_oracle_is_certified_before_comparison() {
    let config = config_with(50.0, PI / 3.0).unwrap();
    let tau = 10.0 / config.gamma();
    for (system, closed) in [
        (unresolved_system(&config).unwrap(), 0),
        (resolved_system(&config).unwrap(), 1),
    ] {
        assert!(richardson_check(&system, tau).unwrap() < 1e-9);
        let step = 0.2 * system.max_step();
        let path = integrate_rk4(&system, tau, step).unwrap();
        for (t, x) in path.taus.iter().zip(&path.states).step_by(97) {
            let y = if closed == 0 {
                unresolved_closed_form(&config, *t).unwrap().to_array()
            } else {
                resolved_closed_form(&config, *t).unwrap().to_array()
            };
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn richardson_estimate_tracks_observed_error() {
    for config in configs(14, 10) {
        let s0 = Vec3::new(0.0, 0.3, -0.4);
        let system = bloch_system(&config, &s0).unwrap();
        let tau = 5.0 / config.gamma();
        let step = 0.5 * system.max_step();
        let estimate = richardson_check_with_step(&system, tau, step).unwrap();
        let end = integrate_rk4(&system, tau, 0.5 * step).unwrap();
        let exact = bloch_evolve(&config, &BlochVector::new(s0).unwrap(), tau).unwrap().s();
        let x = end.last();
        let observed = (0..3).map(|k| (x[k].re - exact[k]).abs()).fold(0.0, f64::max);
        if observed > 1e-13 {
            let ratio = estimate / observed;
            assert!((0.1..=10.0).contains(&ratio), "estimate {estimate:e} observed {observed:e}");
        }
    }
}
