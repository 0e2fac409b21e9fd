//! Seeded construction of configurations with prescribed (λ, ψ) geometry.
//! Used by the test suites and by `validate`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{KondoError, Result};
use crate::model::{build_driven_config, DrivenConfig, KondoParams, Vec3};

/// Builds a config whose precession axis sits at angle ψ from the drive and
/// whose ratio Ω/Γ equals λ. The drive direction has polar angle θ; the sign
/// of the detuning picks one of the two field orientations.
///
/// Uses Ω₀/Γ = 1/(πJ), so J follows from the required Lamb shift and f from
/// the requested Γ.
pub fn config_for_geometry(
    lambda: f64,
    psi: f64,
    theta: f64,
    positive_detuning: bool,
    gamma: f64,
    omega0: f64,
) -> Result<DrivenConfig> {
    config_for_geometry_az(lambda, psi, theta, 0.0, positive_detuning, gamma, omega0)
}

pub fn config_for_geometry_az(
    lambda: f64,
    psi: f64,
    theta: f64,
    azimuth: f64,
    positive_detuning: bool,
    gamma: f64,
    omega0: f64,
) -> Result<DrivenConfig> {
    let (sin_t, cos_t) = theta.sin_cos();
    if sin_t.abs() < 1e-3 {
        return Err(KondoError::InvalidInput("drive too close to circular for the requested angle".into()));
    }
    let sign = if positive_detuning { 1.0 } else { -1.0 };
    let delta = sign * lambda * psi.sin() / sin_t;
    let ratio = lambda * psi.cos() - delta * cos_t;
    if !(ratio > 0.0) {
        return Err(KondoError::InvalidInput(format!("geometry needs a negative Lamb shift (ratio {ratio})")));
    }
    let j = 1.0 / (PI * ratio);
    let phi = 2.0 * (PI * j).atan();
    let f = 2.0 * gamma / (PI * j * phi.sin());
    let n_cl = Vec3::new(sin_t * azimuth.cos(), sin_t * azimuth.sin(), cos_t);
    build_driven_config(KondoParams::new(j, f, delta * gamma, omega0)?, n_cl)
}

/// Any config with the requested (λ, ψ), Γ = 1 and a far carrier. Drive
/// angles are tried from near-linear towards near-circular; ψ close to π
/// needs a nearly circular drive.
pub fn config_with(lambda: f64, psi: f64) -> Result<DrivenConfig> {
    let omega0 = 1e3 * (1.0 + lambda);
    let mut last = KondoError::InvalidInput("no drive angle realises the geometry".into());
    for theta in [0.4 * PI, 0.25 * PI, 0.1 * PI, 0.05, 0.02, 0.01, 0.005, 0.002] {
        for theta in [theta, PI - theta] {
            for positive in [true, false] {
                match config_for_geometry(lambda, psi, theta, positive, 1.0, omega0) {
                    Ok(c) => return Ok(c),
                    Err(e) => last = e,
                }
            }
        }
    }
    Err(last)
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let az: f64 = rng.random_range(-PI..PI);
    let rho = (1.0 - z * z).sqrt();
    Vec3::new(rho * az.cos(), rho * az.sin(), z)
}

/// λ log-uniform in [lo, hi].
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random config with λ ∈ [0.1, 50] and ψ ∈ (0, π), Γ ∈ [0.2, 2] and a
/// carrier far above Ω.
pub fn random_config<R: Rng>(rng: &mut R) -> DrivenConfig {
    random_config_in(rng, 0.1, 50.0)
}

pub fn random_config_in<R: Rng>(rng: &mut R, lambda_lo: f64, lambda_hi: f64) -> DrivenConfig {
    loop {
        let lambda = log_uniform(rng, lambda_lo, lambda_hi);
        let psi = rng.random_range(0.01..PI - 0.01);
        let theta = rng.random_range(0.0..PI);
        let azimuth = rng.random_range(-PI..PI);
        let gamma = rng.random_range(0.2..2.0);
        let omega0 = 1e3 * gamma * (1.0 + lambda);
        if let Ok(c) = config_for_geometry_az(lambda, psi, theta, azimuth, rng.random(), gamma, omega0) {
            return c;
        }
    }
}
