//! Exact evolution of the local spin expectation value ⟨S⟩, its stationary
//! limit and the purity of the emitter's reduced state.

use crate::error::{KondoError, Result};
use crate::model::{DrivenConfig, Vec3};

/// Slack allowed on |s| ≤ ½.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    s: Vec3,
}

impl BlochVector {
    pub fn new(s: Vec3) -> Result<Self> {
        let norm = s.norm();
        if !norm.is_finite() || norm > 0.5 + NORM_SLACK {
            return Err(KondoError::InvalidInput(format!("Bloch vector norm {norm} exceeds 1/2")));
        }
        Ok(Self { s })
    }

    pub(crate) fn unchecked(s: Vec3) -> Self {
        Self { s }
    }

    pub fn s(&self) -> Vec3 {
        self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    pub purities: Vec<f64>,
}

/// dS/dt = h_eff × S − Γ(S − n_cl/2).
pub fn bloch_rhs(config: &DrivenConfig, s: &BlochVector) -> Vec3 {
    config.h_eff().cross(&s.s) - config.gamma() * (s.s - 0.5 * config.n_cl())
}

/// Homogeneous propagator of the spin equation applied to a deviation d:
/// P d e^{−Γt} + (1 − P) d e^{−Γt} cos Ωt + n_h × d e^{−Γt} sin Ωt,
/// with P the projector on n_h.
pub(crate) fn relax(config: &DrivenConfig, d: &Vec3, t: f64) -> Vec3 {
    let n_h = config.n_h();
    let decay = (-config.gamma() * t).exp();
    let (sin, cos) = (config.omega() * t).sin_cos();
    let along = n_h * n_h.dot(d);
    let across = d - along;
    along * decay + across * (decay * cos) + n_h.cross(d) * (decay * sin)
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(KondoError::InvalidInput(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Closed-form ⟨S(t)⟩. Without dissipation the motion is pure precession
/// about n_h.
pub fn bloch_evolve(config: &DrivenConfig, s0: &BlochVector, t: f64) -> Result<BlochVector> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(*s0);
    }
    let target = if config.gamma() > 0.0 { stationary_bloch(config)?.s } else { Vec3::zeros() };
    Ok(BlochVector::unchecked(target + relax(config, &(s0.s - target), t)))
}

/// ⟨S⟩_st = [n_cl + λ n_h×n_cl + λ² cosψ n_h] / 2(1+λ²).
pub fn stationary_bloch(config: &DrivenConfig) -> Result<BlochVector> {
    let lambda = config.require_dissipation()?;
    let n_cl = config.n_cl();
    let n_h = config.n_h();
    let num = n_cl + lambda * n_h.cross(&n_cl) + (lambda * lambda * config.cos_psi()) * n_h;
    Ok(BlochVector::unchecked(num / (2.0 * (1.0 + lambda * lambda))))
}

/// γ = tr ρ² = (1 + 4|s|²)/2.
pub fn purity(s: &BlochVector) -> f64 {
    0.5 * (1.0 + 4.0 * s.s.norm_squared())
}

/// γ_st = [1 + ¼λ²(3 + cos 2ψ)] / (1 + λ²).
pub fn stationary_purity(config: &DrivenConfig) -> Result<f64> {
    let lambda = config.require_dissipation()?;
    let l2 = lambda * lambda;
    let cos_2psi = 1.0 - 2.0 * config.sin_psi().powi(2);
    Ok((1.0 + 0.25 * l2 * (3.0 + cos_2psi)) / (1.0 + l2))
}

/// 1 − γ_st = λ² sin²ψ / 2(1 + λ²), free of the cancellation in 1 − γ_st.
pub fn stationary_impurity(config: &DrivenConfig) -> Result<f64> {
    let lambda = config.require_dissipation()?;
    let l2 = lambda * lambda;
    Ok(l2 * config.sin_psi().powi(2) / (2.0 * (1.0 + l2)))
}

pub fn evolve_trajectory(
    config: &DrivenConfig,
    s0: &BlochVector,
    t_max: f64,
    n_steps: usize,
) -> Result<BlochTrajectory> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(KondoError::InvalidInput(format!("t_max must be positive, got {t_max}")));
    }
    if n_steps < 2 {
        return Err(KondoError::InvalidInput(format!("need at least 2 time samples, got {n_steps}")));
    }
    let last = (n_steps - 1) as f64;
    let times: Vec<f64> = (0..n_steps)
        .map(|k| if k + 1 == n_steps { t_max } else { t_max * k as f64 / last })
        .collect();
    let states = times
        .iter()
        .map(|&t| bloch_evolve(config, s0, t))
        .collect::<Result<Vec<_>>>()?;
    let purities = states.iter().map(purity).collect();
    Ok(BlochTrajectory { times, states, purities })
}
