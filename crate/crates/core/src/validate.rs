//! The oracle suite: every closed form checked against an independent
//! numerical route on seeded random configurations.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bloch::{bloch_evolve, bloch_rhs, stationary_bloch, BlochVector};
use crate::correlators::{
    resolved_closed_form, resolved_initial, resolved_ode_rhs, unresolved_closed_form, unresolved_initial,
    unresolved_ode_rhs, ResolvedCorrelators, UnresolvedCorrelators,
};
use crate::error::{KondoError, Result};
use crate::model::{DrivenConfig, JonesPolarization, Vec3};
use crate::oracle::{default_step, integrate_rk4, richardson_check, LinearSystem};
use crate::sampling::{config_with, random_config, random_unit};
use crate::spectra::{c0_inelastic, default_power_grid, inelastic_density, outgoing_field, photon_flux, power_accounting};
use crate::statistics::{g2, g2_via_combinations, k_evolve, k_initial_unscaled};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} samples={:<5} max_dev={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.max_deviation,
            self.tolerance
        )
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn to_real(v: &[Complex64]) -> Vec3 {
    Vec3::new(v[0].re, v[1].re, v[2].re)
}

fn configs(seed: u64, count: usize) -> (Vec<DrivenConfig>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs = (0..count).map(|_| random_config(&mut rng)).collect();
    (cs, rng)
}

fn max_of(values: Vec<Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

/// Bloch equation as a linear system in the components of ⟨S⟩.
pub fn bloch_system(config: &DrivenConfig, s0: &Vec3) -> Result<LinearSystem> {
    LinearSystem::from_affine(
        |x| {
            let d = bloch_rhs(config, &BlochVector::unchecked(to_real(x)));
            vec![c(d.x), c(d.y), c(d.z)]
        },
        vec![c(s0.x), c(s0.y), c(s0.z)],
    )
}

/// dK/dτ = h_eff × K − Γ(K − (A/2) n_cl).
pub fn k_system(config: &DrivenConfig, k0: &Vec3, source_norm: f64) -> Result<LinearSystem> {
    let h = config.h_eff();
    let n = config.n_cl();
    let g = config.gamma();
    LinearSystem::from_affine(
        |x| {
            let k = to_real(x);
            let d = h.cross(&k) - g * (k - 0.5 * source_norm * n);
            vec![c(d.x), c(d.y), c(d.z)]
        },
        vec![c(k0.x), c(k0.y), c(k0.z)],
    )
}

pub fn unresolved_system(config: &DrivenConfig) -> Result<LinearSystem> {
    let init = unresolved_initial(config)?;
    LinearSystem::from_affine(
        |x| unresolved_ode_rhs(config, &UnresolvedCorrelators::from_array(0.0, x)).to_array().to_vec(),
        init.to_array().to_vec(),
    )
}

pub fn resolved_system(config: &DrivenConfig) -> Result<LinearSystem> {
    let init = resolved_initial(config)?;
    LinearSystem::from_affine(
        |x| resolved_ode_rhs(config, &ResolvedCorrelators::from_array(0.0, x)).to_array().to_vec(),
        init.to_array().to_vec(),
    )
}

fn sup_deviation<F>(system: &LinearSystem, tau_max: f64, step: f64, stride: usize, exact: F) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    let path = integrate_rk4(system, tau_max, step)?;
    let mut worst = 0.0f64;
    for (k, (tau, x)) in path.taus.iter().zip(&path.states).enumerate() {
        if k % stride != 0 && k + 1 != path.taus.len() {
            continue;
        }
        let y = exact(*tau)?;
        for (a, b) in x.iter().zip(&y) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Closed-form ⟨S(t)⟩ against RK4 of the Bloch equation from random pure
/// initial states, sup over t ∈ [0, 10/Γ].
pub fn check_bloch(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, mut rng) = configs(seed, count);
    let starts: Vec<Vec3> = (0..count).map(|_| 0.5 * random_unit(&mut rng)).collect();
    let devs = cs
        .par_iter()
        .zip(&starts)
        .map(|(config, s0)| {
            let sys = bloch_system(config, s0)?;
            let b0 = BlochVector::new(*s0)?;
            sup_deviation(&sys, 10.0 / config.gamma(), default_step(config.gamma(), config.omega()), 1, |t| {
                let s = bloch_evolve(config, &b0, t)?.s();
                Ok(vec![c(s.x), c(s.y), c(s.z)])
            })
        })
        .collect();
    Ok(CheckReport { name: "bloch closed form vs rk4", samples: count, max_deviation: max_of(devs)?, tolerance: 1e-8 })
}

/// Both correlator sets against RK4 of their ODE systems from the stated
/// initial values, sup over τ ∈ [0, 10/Γ].
pub fn check_correlators(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, _) = configs(seed, count);
    let devs = cs
        .par_iter()
        .map(|config| {
            let step = default_step(config.gamma(), config.omega());
            let tau_max = 10.0 / config.gamma();
            let u = sup_deviation(&unresolved_system(config)?, tau_max, step, 4, |t| {
                Ok(unresolved_closed_form(config, t)?.to_array().to_vec())
            })?;
            let r = sup_deviation(&resolved_system(config)?, tau_max, step, 4, |t| {
                Ok(resolved_closed_form(config, t)?.to_array().to_vec())
            })?;
            Ok(u.max(r))
        })
        .collect();
    Ok(CheckReport { name: "correlators vs rk4", samples: count, max_deviation: max_of(devs)?, tolerance: 1e-8 })
}

/// Propagated K vectors against RK4, relative to f.
pub fn check_k_vectors(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, mut rng) = configs(seed, count);
    let ms: Vec<Vec3> = (0..count).map(|_| random_unit(&mut rng)).collect();
    let devs = cs
        .par_iter()
        .zip(&ms)
        .map(|(config, m)| {
            let mut worst = 0.0f64;
            for k0 in [k_initial_unscaled(config, None)?, k_initial_unscaled(config, Some(m))?] {
                let sys = k_system(config, &k0.value, k0.source_norm)?;
                let dev = sup_deviation(&sys, 10.0 / config.gamma(), default_step(config.gamma(), config.omega()), 8, |t| {
                    let k = k_evolve(config, &k0, t)?.value;
                    Ok(vec![c(k.x), c(k.y), c(k.z)])
                })?;
                worst = worst.max(dev / config.f());
            }
            Ok(worst)
        })
        .collect();
    Ok(CheckReport { name: "k vectors vs rk4", samples: count, max_deviation: max_of(devs)?, tolerance: 1e-8 })
}

/// The l-form of g² against the normalized G-combinations.
pub fn check_g2_paths(seed: u64, count: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut samples = 0;
    while samples < count {
        let config = random_config(&mut rng);
        let (n, m) = (random_unit(&mut rng), random_unit(&mut rng));
        let tau = rng.random_range(0.0..10.0) / config.gamma();
        match (g2(&config, &n, &m, tau), g2_via_combinations(&config, &n, &m, tau)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            (Err(KondoError::DetectorDark { .. }), Err(KondoError::DetectorDark { .. })) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
        samples += 1;
    }
    Ok(CheckReport { name: "g2 l-form vs G-combinations", samples, max_deviation: worst, tolerance: 1e-12 })
}

/// Average-field bilinear against the elastic Jones vector, relative to f.
pub fn check_outgoing_field(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, mut rng) = configs(seed, count);
    let mut worst = 0.0f64;
    for config in &cs {
        let length = rng.random_range(0.5..5.0);
        let pol = JonesPolarization::from_direction(&config.n_cl(), config.f(), length)?;
        worst = worst.max(outgoing_field(config, &pol)?.identity_residual / config.f());
    }
    Ok(CheckReport { name: "outgoing field identity", samples: count, max_deviation: worst, tolerance: 1e-12 })
}

/// Photon flux from analytic Lorentzian areas.
pub fn check_flux(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, _) = configs(seed, count);
    let mut worst = 0.0f64;
    for config in &cs {
        let (el, inel) = photon_flux(config)?;
        worst = worst.max(((el + inel) / config.f() - 1.0).abs());
    }
    Ok(CheckReport { name: "photon flux conservation", samples: count, max_deviation: worst, tolerance: 1e-6 })
}

/// Power from the sampled spectrum plus tails against ω₀ f.
pub fn check_power(seed: u64, count: usize) -> Result<CheckReport> {
    let (cs, _) = configs(seed, count);
    let devs = cs
        .par_iter()
        .map(|config| {
            let b = power_accounting(config, &default_power_grid(config)?)?;
            Ok((b.p_numeric / b.p_tot - 1.0).abs())
        })
        .collect();
    Ok(CheckReport { name: "power conservation", samples: count, max_deviation: max_of(devs)?, tolerance: 1e-4 })
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson<F>(f: F, a: f64, b: f64, intervals: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += f(a + h * k as f64) * w;
    }
    sum * (h / 3.0)
}

/// 2 Re ∫₀^T e^{−iνΩτ} C⁰_inel(τ) dτ with T = 40/Γ, by Simpson's rule at
/// about 40 points per radian of the fastest oscillation.
pub fn transformed_c0_inelastic(config: &DrivenConfig, nu: f64) -> Result<f64> {
    c0_inelastic(config, 0.0)?;
    let tau_max = 40.0 / config.gamma();
    let fastest = config.omega() * (nu.abs() + 1.0) + config.gamma();
    let intervals = (40.0 * fastest * tau_max).ceil() as usize;
    let w = nu * config.omega();
    let integral = simpson(
        |t| Complex64::from_polar(1.0, -w * t) * c0_inelastic(config, t).unwrap_or_default(),
        0.0,
        tau_max,
        intervals,
    );
    Ok(2.0 * integral.re)
}

/// Closed-form spectrum against the numerical transform of C⁰_inel(τ) on
/// ν ∈ [−5, 5], relative to the spectral maximum.
pub fn check_transform(seed: u64, count: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cs = Vec::new();
    while cs.len() < count {
        let lam = crate::sampling::log_uniform(&mut rng, 0.3, 10.0);
        let psi = rng.random_range(0.2..PI - 0.2);
        cs.push(config_with(lam, psi)?);
    }
    let nus: Vec<f64> = (0..=20).map(|k| -5.0 + 0.5 * k as f64).collect();
    let devs = cs
        .par_iter()
        .map(|config| {
            let peak = nus.iter().map(|&nu| inelastic_density(config, nu)).collect::<Result<Vec<_>>>()?;
            let scale = peak.iter().cloned().fold(0.0, f64::max);
            let mut worst = 0.0f64;
            for (&nu, exact) in nus.iter().zip(&peak) {
                worst = worst.max((transformed_c0_inelastic(config, nu)? - exact).abs() / scale);
            }
            Ok(worst)
        })
        .collect();
    Ok(CheckReport { name: "spectrum vs fourier transform", samples: count, max_deviation: max_of(devs)?, tolerance: 1e-5 })
}

/// Richardson error estimate of the oracle on the stiffest geometry.
pub fn check_richardson() -> Result<CheckReport> {
    let config = config_with(50.0, PI / 3.0)?;
    let s0 = stationary_bloch(&config)?.s() + Vec3::new(0.1, -0.2, 0.05);
    let tau = 10.0 / config.gamma();
    let mut worst = 0.0f64;
    for sys in [bloch_system(&config, &s0)?, unresolved_system(&config)?, resolved_system(&config)?] {
        worst = worst.max(richardson_check(&sys, tau)?);
    }
    Ok(CheckReport { name: "richardson gate at lambda 50", samples: 3, max_deviation: worst, tolerance: 1e-9 })
}

/// The suite run by the `validate` command.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        check_richardson()?,
        check_bloch(seed, 100)?,
        check_correlators(seed + 1, 60)?,
        check_k_vectors(seed + 2, 60)?,
        check_g2_paths(seed + 3, 500)?,
        check_outgoing_field(seed + 4, 200)?,
        check_flux(seed + 5, 200)?,
        check_power(seed + 6, 40)?,
        check_transform(seed + 7, 3)?,
    ])
}
