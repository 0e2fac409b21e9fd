//! First-order field correlations of the scattered light: the elastic and
//! inelastic parts, unresolved and polarization-resolved power spectra, the
//! Jones vector of the average outgoing field and the power budget.
//!
//! Frequencies are ν = (ω − ω₀)/Ω and transforms follow
//! C̃(ω) = 2 Re ∫₀^∞ dτ e^{−iωτ} C(τ); the carrier e^{iω₀τ} is left out of
//! every time-domain function here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::{stationary_bloch, stationary_impurity};
use crate::correlators::unresolved_closed_form;
use crate::error::{KondoError, Result};
use crate::model::{check_unit, jones_from_amplitudes, pauli_bilinear, DrivenConfig, JonesPolarization, Vec3};

/// Default ν grid for plotting: [−6, 6] with 2401 points.
pub const DEFAULT_NU_MIN: f64 = -6.0;
pub const DEFAULT_NU_MAX: f64 = 6.0;
pub const DEFAULT_NU_STEPS: usize = 2401;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumUnresolved {
    /// W_el; the elastic line is (2π/Ω) W_el δ(ν).
    pub elastic_weight: f64,
    pub nu_grid: Vec<f64>,
    pub inelastic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResolved {
    pub detector: Vec3,
    pub base: SpectrumUnresolved,
    /// n_d · C̃_s,inel(ν)
    pub vector_part: Vec<f64>,
    /// W_el + n_d · C_s,el(0), the weight of the elastic line in g¹.
    pub elastic_weight: f64,
}

impl SpectrumResolved {
    /// g¹_{n_d}(ν) = C̃⁰_inel(ν) + n_d · C̃_s,inel(ν).
    pub fn g1(&self) -> Vec<f64> {
        self.base.inelastic.iter().zip(&self.vector_part).map(|(a, b)| a + b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutgoingField {
    /// Jones vector of the stationary average field.
    pub s_q: Vec3,
    /// arccos(e_z · s_q / |s_q|) in degrees.
    pub theta_deg: f64,
    /// |s_q − C_s,el(0)|, zero up to rounding.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub p_tot: f64,
    pub p_inel: f64,
    pub p_numeric: f64,
    /// Analytic contribution of the Lorentzians outside the grid.
    pub tail: f64,
}

fn require_spectral(config: &DrivenConfig) -> Result<f64> {
    let lambda = config.require_dissipation()?;
    config.require_precession()?;
    Ok(lambda)
}

/// W_el = f [1 − (3/2)(1 − γ_st) sin²(φ/2)], the τ-independent prefactor of
/// the elastic correlator. Real by construction.
pub fn c0_elastic(config: &DrivenConfig) -> Result<f64> {
    let impurity = stationary_impurity(config)?;
    Ok(config.f() * (1.0 - 1.5 * impurity * config.phase().sin_half().powi(2)))
}

/// f sin²(φ/2) [A(τ) − ⟨S⟩²_st + i B_cl(τ)].
pub fn c0_inelastic(config: &DrivenConfig, tau: f64) -> Result<Complex64> {
    let u = unresolved_closed_form(config, tau)?;
    let s2 = stationary_bloch(config)?.s().norm_squared();
    Ok(config.f() * config.phase().sin_half().powi(2) * (u.a - s2 + Complex64::i() * u.b_cl))
}

/// Photon flux carried by the elastic and inelastic parts, using the exact
/// area 3π/λ of the three Lorentzians.
pub fn photon_flux(config: &DrivenConfig) -> Result<(f64, f64)> {
    let lambda = require_spectral(config)?;
    let prefactor = inelastic_prefactor(config)?;
    let inelastic = config.omega() / (2.0 * PI) * prefactor * 3.0 * PI / lambda;
    Ok((c0_elastic(config)?, inelastic))
}

/// f (1 − γ_st) sin²(φ/2) / Γ.
fn inelastic_prefactor(config: &DrivenConfig) -> Result<f64> {
    let impurity = stationary_impurity(config)?;
    Ok(config.f() * impurity * config.phase().sin_half().powi(2) / config.gamma())
}

/// Centres ν_k and slopes a_k of the three terms (1 + a_k x)/(1 + λ²x²),
/// x = ν − ν_k, making up the unresolved inelastic spectrum.
fn lorentzian_terms(config: &DrivenConfig) -> [(f64, f64); 3] {
    let half = 0.5 * config.psi();
    [
        (0.0, config.cos_psi()),
        (1.0, -half.cos().powi(2)),
        (-1.0, half.sin().powi(2)),
    ]
}

fn three_lorentzians(terms: &[(f64, f64); 3], lambda: f64, nu: f64) -> f64 {
    terms
        .iter()
        .map(|&(centre, slope)| {
            let x = nu - centre;
            (1.0 + slope * x) / (1.0 + lambda * lambda * x * x)
        })
        .sum()
}

/// C̃⁰_inel(ν) at a single frequency.
pub fn inelastic_density(config: &DrivenConfig, nu: f64) -> Result<f64> {
    let lambda = require_spectral(config)?;
    Ok(inelastic_prefactor(config)? * three_lorentzians(&lorentzian_terms(config), lambda, nu))
}

fn map_grid<F>(grid: &[f64], f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    grid.par_iter().map(|&nu| f(nu)).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(KondoError::InvalidInput("frequency grid contains non-finite values".into()));
    }
    Ok(())
}

pub fn spectrum_unresolved(config: &DrivenConfig, nu_grid: &[f64]) -> Result<SpectrumUnresolved> {
    check_grid(nu_grid)?;
    let lambda = require_spectral(config)?;
    let prefactor = inelastic_prefactor(config)?;
    let terms = lorentzian_terms(config);
    let inelastic = map_grid(nu_grid, |nu| prefactor * three_lorentzians(&terms, lambda, nu));
    Ok(SpectrumUnresolved { elastic_weight: c0_elastic(config)?, nu_grid: nu_grid.to_vec(), inelastic })
}

/// Sequential twin of [`spectrum_unresolved`], kept to pin the parallel path
/// to identical bits.
pub fn spectrum_unresolved_sequential(config: &DrivenConfig, nu_grid: &[f64]) -> Result<SpectrumUnresolved> {
    check_grid(nu_grid)?;
    let lambda = require_spectral(config)?;
    let prefactor = inelastic_prefactor(config)?;
    let terms = lorentzian_terms(config);
    let inelastic = nu_grid.iter().map(|&nu| prefactor * three_lorentzians(&terms, lambda, nu)).collect();
    Ok(SpectrumUnresolved { elastic_weight: c0_elastic(config)?, nu_grid: nu_grid.to_vec(), inelastic })
}

/// Direction-dependent inelastic spectrum C̃_s,inel(ν) as a real vector.
pub fn vector_density(config: &DrivenConfig, nu: f64) -> Result<Vec3> {
    let lambda = require_spectral(config)?;
    let pref = config.f() * config.phase().sin_half().powi(2) * stationary_impurity(config)? / (2.0 * config.omega());
    Ok(pref * vector_bracket(config, lambda, nu))
}

fn vector_bracket(config: &DrivenConfig, lam: f64, nu: f64) -> Vec3 {
    let u = config.n_cl();
    let h = config.n_h();
    let w = u.cross(&h);
    let c = config.cos_psi();
    let l2 = lam * lam;
    let l = 1.0 + l2;
    let d0 = l2 * nu * nu + 1.0;
    let dm = l2 * (nu - 1.0).powi(2) + 1.0;
    let dp = l2 * (nu + 1.0).powi(2) + 1.0;
    let centre = -(lam * u - 2.0 * lam * c * h + w) / d0 + (lam * nu / d0) * h;
    let stokes = (2.0 * lam * u + 2.0 * lam * (l - c) * h + (1.0 - l2) * w) / (2.0 * l * dm)
        - lam * (nu - 1.0) * ((1.0 - l2) * u + (l + 2.0 * l2 * c) * h - 2.0 * lam * w) / (2.0 * l * dm);
    let anti = (2.0 * lam * u - 2.0 * lam * (l + c) * h + (1.0 - l2) * w) / (2.0 * l * dp)
        + lam * (nu + 1.0) * ((1.0 - l2) * u - (l - 2.0 * l2 * c) * h - 2.0 * lam * w) / (2.0 * l * dp);
    centre + stokes + anti
}

/// C_s,el(0): Jones vector of the elastic (coherent) part of the output.
pub fn cs_elastic_zero(config: &DrivenConfig) -> Result<Vec3> {
    let s = stationary_bloch(config)?.s();
    let impurity = stationary_impurity(config)?;
    let n = config.n_cl();
    let ph = config.phase();
    let (c2, s2) = (ph.cos_half().powi(2), ph.sin_half().powi(2));
    let f = config.f();
    Ok(0.5 * f * (c2 * n + 2.0 * s2 * s - ph.sin() * n.cross(&s)) + 0.25 * f * s2 * impurity * (n - 4.0 * s))
}

pub fn spectrum_resolved(config: &DrivenConfig, n_d: &Vec3, nu_grid: &[f64]) -> Result<SpectrumResolved> {
    check_unit(n_d, "n_d")?;
    let base = spectrum_unresolved(config, nu_grid)?;
    let lambda = require_spectral(config)?;
    let pref = config.f() * config.phase().sin_half().powi(2) * stationary_impurity(config)? / (2.0 * config.omega());
    let vector_part = map_grid(nu_grid, |nu| pref * n_d.dot(&vector_bracket(config, lambda, nu)));
    let elastic_weight = base.elastic_weight + n_d.dot(&cs_elastic_zero(config)?);
    Ok(SpectrumResolved { detector: *n_d, base, vector_part, elastic_weight })
}

/// Stationary average field amplitudes ⟨a_σ⟩ = U α / √L with
/// U = ((1 − e^{iφ})/2) σ·⟨S⟩_st + ((3 + e^{iφ})/4) 1.
pub fn average_field(config: &DrivenConfig, pol: &JonesPolarization) -> Result<[Complex64; 2]> {
    let s = stationary_bloch(config)?.s();
    let e = config.phase().exp_i();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let g = (one - e) * 0.5;
    let d = (3.0 + e) * 0.25;
    let u = [
        [d + g * s.z, g * (s.x - i * s.y)],
        [g * (s.x + i * s.y), d - g * s.z],
    ];
    let a = pol.amplitudes();
    let norm = pol.length.sqrt();
    Ok([(u[0][0] * a[0] + u[0][1] * a[1]) / norm, (u[1][0] * a[0] + u[1][1] * a[1]) / norm])
}

pub fn outgoing_field(config: &DrivenConfig, pol: &JonesPolarization) -> Result<OutgoingField> {
    let drive = jones_from_amplitudes(pol)?;
    let tol = 1e-9;
    if (drive.f - config.f()).abs() > tol * config.f().max(1.0) || (drive.n_cl - config.n_cl()).norm() > tol {
        return Err(KondoError::InvalidInput("polarization does not match the configuration's drive".into()));
    }
    let a = average_field(config, pol)?;
    let s_q = 0.5 * pauli_bilinear(a, a);
    let norm = s_q.norm();
    if !(norm > 0.0) {
        return Err(KondoError::ZeroField);
    }
    let theta_deg = (s_q.z / norm).clamp(-1.0, 1.0).acos().to_degrees();
    let identity_residual = (s_q - cs_elastic_zero(config)?).norm();
    Ok(OutgoingField { s_q, theta_deg, identity_residual })
}

/// θ of the outgoing field, with the drive amplitudes rebuilt from the
/// config (pulse length 1).
pub fn ellipticity(config: &DrivenConfig) -> Result<f64> {
    let pol = JonesPolarization::from_direction(&config.n_cl(), config.f(), 1.0)?;
    Ok(outgoing_field(config, &pol)?.theta_deg)
}

/// ∫ over [x1, x2] of (1 + a x)/(1 + λ²x²).
fn number_antiderivative(lam: f64, a: f64, x: f64) -> f64 {
    (lam * x).atan() / lam + a * (lam * lam * x * x).ln_1p() / (2.0 * lam * lam)
}

/// ∫ (x + ν_k)(1 + a x)/(1 + λ²x²) dx.
fn weighted_antiderivative(lam: f64, centre: f64, a: f64, x: f64) -> f64 {
    let l2 = lam * lam;
    let at = (lam * x).atan();
    centre * at / lam + (1.0 + a * centre) * (l2 * x * x).ln_1p() / (2.0 * l2) + a * (x / l2 - at / (l2 * lam))
}

/// Uniform grid adapted to the line width 1/λ: wide enough that the
/// Lorentzian tails carry well under 1% of the inelastic power, and fine
/// enough for the trapezoid rule to be exact to many digits.
pub fn default_power_grid(config: &DrivenConfig) -> Result<Vec<f64>> {
    let lambda = require_spectral(config)?;
    let half_width = (200.0 / lambda).max(50.0);
    let step = (1.0 / (8.0 * lambda)).min(0.01);
    let n = (2.0 * half_width / step).ceil() as usize;
    Ok(uniform_grid(-half_width, half_width, n + 1))
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + (hi - lo) * k as f64 / last })
        .collect()
}

/// P_tot = ω₀ f, P_inel = (3/2) ω₀ f (1 − γ_st) sin²(φ/2), and the numeric
/// total from the grid (trapezoid) plus analytic tails plus the elastic line.
pub fn power_accounting(config: &DrivenConfig, nu_grid: &[f64]) -> Result<PowerBudget> {
    let lambda = require_spectral(config)?;
    check_grid(nu_grid)?;
    if nu_grid.len() < 2 || nu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(KondoError::InvalidInput("power grid must be strictly increasing".into()));
    }
    let omega0 = config.params().omega0;
    let omega = config.omega();
    let f = config.f();
    let impurity = stationary_impurity(config)?;
    let p_tot = omega0 * f;
    let p_inel = 1.5 * omega0 * f * impurity * config.phase().sin_half().powi(2);

    let prefactor = inelastic_prefactor(config)?;
    let terms = lorentzian_terms(config);
    let (lo, hi) = (nu_grid[0], nu_grid[nu_grid.len() - 1]);

    let mut window_number = 0.0;
    let mut window_weighted = 0.0;
    for &(centre, a) in &terms {
        let (x1, x2) = (lo - centre, hi - centre);
        window_number += number_antiderivative(lambda, a, x2) - number_antiderivative(lambda, a, x1);
        window_weighted += weighted_antiderivative(lambda, centre, a, x2) - weighted_antiderivative(lambda, centre, a, x1);
    }
    // full-line values: 3π/λ for the photon number, 0 (principal value) for
    // the ν-weighted part since Σ ν_k = Σ a_k = 0
    let tail_number = 3.0 * PI / lambda - window_number;
    let tail_weighted = -window_weighted;
    let scale = omega / (2.0 * PI) * prefactor;
    let tail = scale * (omega * tail_weighted + omega0 * tail_number);

    let integrand: Vec<f64> = nu_grid
        .iter()
        .map(|&nu| (nu * omega + omega0) * three_lorentzians(&terms, lambda, nu))
        .collect();
    let mut trapezoid = 0.0;
    for k in 1..nu_grid.len() {
        trapezoid += 0.5 * (nu_grid[k] - nu_grid[k - 1]) * (integrand[k] + integrand[k - 1]);
    }
    let p_numeric = omega0 * c0_elastic(config)? + scale * trapezoid + tail;

    let covers = lo <= -50.0 && hi >= 50.0;
    if !covers || tail.abs() > 0.01 * p_inel {
        return Err(KondoError::GridTooNarrow { tail: tail.abs(), inelastic: p_inel });
    }
    Ok(PowerBudget { p_tot, p_inel, p_numeric, tail })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub nu: f64,
    pub value: f64,
    /// Half width at half maximum, averaged over both flanks.
    pub half_width: f64,
}

/// Strict local maxima of a sampled curve with their half widths; a flank
/// that never drops to half height is measured to the neighbouring minimum.
pub fn find_peaks(nu: &[f64], y: &[f64]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if !(y[k] > y[k - 1] && y[k] > y[k + 1]) {
            continue;
        }
        let half = 0.5 * y[k];
        let crossing = |dir: isize| -> f64 {
            let mut j = k as isize;
            loop {
                let next = j + dir;
                if next < 0 || next as usize >= y.len() {
                    return (nu[j as usize] - nu[k]).abs();
                }
                let (a, b) = (y[j as usize], y[next as usize]);
                if b <= half {
                    let t = (a - half) / (a - b);
                    let x = nu[j as usize] + t * (nu[next as usize] - nu[j as usize]);
                    return (x - nu[k]).abs();
                }
                if b > a {
                    return (nu[j as usize] - nu[k]).abs();
                }
                j = next;
            }
        };
        peaks.push(Peak { nu: nu[k], value: y[k], half_width: 0.5 * (crossing(-1) + crossing(1)) });
    }
    peaks
}
