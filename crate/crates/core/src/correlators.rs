//! Stationary two-time spin correlators ⟨S^i(t+τ) S^j(t)⟩ projected on the
//! frame {n_cl, n_h, n_cl × n_h}.
//!
//! Two sets are provided. The unresolved set (A, B_cl, B_h, C_cl,h, C_h,h, D)
//! feeds the scalar spectrum, the resolved set (C_cl,cl, C_h,cl, E_R, E_L,
//! F, F̄) and the a, b, c coefficients feed the polarization-resolved one.
//! Each set comes as closed forms, as the right-hand side of its linear
//! equations of motion, and with its τ = 0 values.

use num_complex::Complex64;

use crate::bloch::check_time;
use crate::error::Result;
use crate::model::DrivenConfig;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Unresolved correlators at delay τ:
/// A = ⟨S(t+τ)·S(t)⟩, B_cl = n_cl·⟨S(t+τ)×S(t)⟩, B_h = n_h·⟨S(t+τ)×S(t)⟩,
/// C_cl,h = ⟨(n_cl·S(t+τ))(n_h·S(t))⟩, C_h,h = ⟨(n_h·S(t+τ))(n_h·S(t))⟩,
/// D = ⟨(n_cl·(n_h×S(t+τ)))(n_h·S(t))⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnresolvedCorrelators {
    pub tau: f64,
    pub a: C,
    pub b_cl: C,
    pub b_h: C,
    pub c_clh: C,
    pub c_hh: C,
    pub d: C,
}

impl UnresolvedCorrelators {
    pub fn to_array(&self) -> [C; 6] {
        [self.a, self.b_cl, self.b_h, self.c_clh, self.c_hh, self.d]
    }

    pub fn from_array(tau: f64, v: &[C]) -> Self {
        Self { tau, a: v[0], b_cl: v[1], b_h: v[2], c_clh: v[3], c_hh: v[4], d: v[5] }
    }
}

/// Resolved correlators at delay τ, with n_⊥ = n_cl × n_h (not normalized):
/// C_cl,cl = ⟨(n_cl·S(t+τ))(n_cl·S(t))⟩, C_h,cl = ⟨(n_h·S(t+τ))(n_cl·S(t))⟩,
/// E_R = ⟨(n_cl·S(t+τ))(n_cl·(n_h×S(t)))⟩, E_L = ⟨(n_cl·(n_h×S(t+τ)))(n_cl·S(t))⟩,
/// F = ⟨(n_⊥·S(t+τ))(n_⊥·S(t))⟩, F̄ = ⟨(n_h·S(t+τ))(n_⊥·S(t))⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedCorrelators {
    pub tau: f64,
    pub c_clcl: C,
    pub c_hcl: C,
    pub e_r: C,
    pub e_l: C,
    pub f: C,
    pub fbar: C,
}

impl ResolvedCorrelators {
    pub fn to_array(&self) -> [C; 6] {
        [self.c_clcl, self.c_hcl, self.e_r, self.e_l, self.f, self.fbar]
    }

    pub fn from_array(tau: f64, v: &[C]) -> Self {
        Self { tau, c_clcl: v[0], c_hcl: v[1], e_r: v[2], e_l: v[3], f: v[4], fbar: v[5] }
    }
}

/// Coefficients of A_R + A_L − n_cl A − i B_g = a n_cl + b n_h + c n_cl×n_h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcCoefficients {
    pub tau: f64,
    pub a: C,
    pub b: C,
    pub c: C,
}

/// Trigonometric and λ-dependent constants shared by all closed forms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub lambda: f64,
    pub cos: f64,
    pub sin2: f64,
    pub cos2_half: f64,
    pub sin2_half: f64,
    /// 1 + λ²
    pub l: f64,
    /// (1 + λ² cos²ψ)/(1 + λ²)
    pub q: f64,
    /// λ sin²ψ/(1 + λ²)
    pub k: f64,
}

impl Geometry {
    pub fn new(config: &DrivenConfig) -> Result<Self> {
        let lambda = config.require_dissipation()?;
        Ok(Self::from_parts(lambda, config.psi(), config.cos_psi(), config.sin_psi()))
    }

    #[cfg(test)]
    pub fn from_angles(lambda: f64, psi: f64) -> Self {
        Self::from_parts(lambda, psi, psi.cos(), psi.sin())
    }

    fn from_parts(lambda: f64, psi: f64, cos: f64, sin: f64) -> Self {
        let sin2 = sin * sin;
        let l = 1.0 + lambda * lambda;
        Self {
            lambda,
            cos,
            sin2,
            cos2_half: (0.5 * psi).cos().powi(2),
            sin2_half: (0.5 * psi).sin().powi(2),
            l,
            q: (1.0 + lambda * lambda * cos * cos) / l,
            k: lambda * sin2 / l,
        }
    }
}

/// The three decaying exponentials e^{−Γτ}, e^{−(Γ−iΩ)τ}, e^{−(Γ+iΩ)τ}.
#[derive(Debug, Clone, Copy)]
struct Decay {
    plain: C,
    minus: C,
    plus: C,
}

impl Decay {
    fn at(config: &DrivenConfig, tau: f64) -> Self {
        let e = (-config.gamma() * tau).exp();
        let (s, c) = (config.omega() * tau).sin_cos();
        Self { plain: re(e), minus: C::new(e * c, e * s), plus: C::new(e * c, -e * s) }
    }

    fn settled() -> Self {
        Self { plain: re(0.0), minus: re(0.0), plus: re(0.0) }
    }
}

fn unresolved_from(g: &Geometry, e: &Decay, tau: f64) -> UnresolvedCorrelators {
    let (lam, c, s2, ch, sh, l, q) = (g.lambda, g.cos, g.sin2, g.cos2_half, g.sin2_half, g.l, g.q);
    let minus_w = e.minus / C::new(lam, 1.0);
    let plus_w = e.plus / C::new(lam, -1.0);
    let c_hh = 0.25 * (c * c + s2 * e.plain);
    let c_clh = 0.25 * c * (q + s2 * e.plain) - I * (0.25 * s2) * (ch * minus_w + sh * plus_w);
    let d = 0.25 * s2 * (ch * minus_w - sh * plus_w - lam * c / l);
    let fm = ch - 0.25 * s2 / l;
    let fp = sh - 0.25 * s2 / l;
    let a = 0.25 * q + 0.25 * s2 * e.plain + 0.5 * fm * e.minus + 0.5 * fp * e.plus;
    let b_h = 0.5 * I * fm * e.minus - 0.5 * I * fp * e.plus;
    let b_cl = I * (0.25 * s2 / l) * C::new(1.0, -lam * c) * e.plain
        + I * (ch * (0.25 * s2 / C::new(1.0, -lam) + 0.5 * c) - c * s2 / (8.0 * l)) * e.minus
        + I * (sh * (0.25 * s2 / C::new(1.0, lam) - 0.5 * c) + c * s2 / (8.0 * l)) * e.plus;
    UnresolvedCorrelators { tau, a, b_cl, b_h, c_clh, c_hh, d }
}

fn resolved_from(g: &Geometry, e: &Decay, tau: f64) -> ResolvedCorrelators {
    let (lam, c, s2, l, q, k) = (g.lambda, g.cos, g.sin2, g.l, g.q, g.k);
    let c_hcl = 0.25 * c * q + 0.25 * k * C::new(lam * c, 1.0) * e.plain;
    let wm = C::new(k + lam * (1.0 + c), -(c + q));
    let wp = C::new(k + lam * (1.0 - c), -(c - q));
    let c_clcl = 0.25 * q * q
        + 0.25 * c * k * C::new(lam * c, 1.0) * e.plain
        + 0.125 * k * wm * e.minus
        + 0.125 * k * wp * e.plus;
    let e_l = re(-0.25 * lam * s2 * q / l) + 0.125 * I * k * wm * e.minus - 0.125 * I * k * wp * e.plus;
    let fbar = 0.25 * s2 / l * (-lam * c + C::new(lam * c, 1.0) * e.plain);
    let um = 1.0 + c + I * lam / C::new(1.0, -lam) * (s2 / l);
    let up = 1.0 - c - I * lam / C::new(1.0, lam) * (s2 / l);
    let f = re(0.25 * lam * lam * s2 * s2 / (l * l)) + 0.125 * s2 * um * e.minus + 0.125 * s2 * up * e.plus;
    let e_r = re(-0.25 * lam * s2 * q / l) + 0.25 * c * s2 / l * C::new(lam * c, 1.0) * e.plain
        - 0.125 * I * s2 * um * e.minus
        + 0.125 * I * s2 * up * e.plus;
    ResolvedCorrelators { tau, c_clcl, c_hcl, e_r, e_l, f, fbar }
}

fn abc_from(g: &Geometry, e: &Decay, tau: f64) -> AbcCoefficients {
    let (lam, c, s2, l, q, k) = (g.lambda, g.cos, g.sin2, g.l, g.q, g.k);
    let rm = C::new(1.0, lam) / C::new(1.0, -lam);
    let rp = C::new(1.0, -lam) / C::new(1.0, lam);
    let a = re(0.25 * (1.0 - lam * lam) * q / l) - 0.25 * lam * lam * s2 / l * e.plain
        - 0.125 * I * k * (rm * e.minus - rp * e.plus);
    let b = re(0.5 * lam * lam * c * q / l)
        + 0.25 * k * C::new(2.0 * lam * c, 1.0) * e.plain
        + 0.125
            * k
            * ((2.0 * lam - 2.0 * lam * c / C::new(1.0, -lam) - I) * e.minus
                - (2.0 * lam + 2.0 * lam * c / C::new(1.0, lam) + I) * e.plus);
    let cc = re(-0.5 * lam * q / l) - 0.25 * k * e.plain + 0.125 * k * (rm * e.minus + rp * e.plus);
    AbcCoefficients { tau, a, b, c: cc }
}

pub fn unresolved_closed_form(config: &DrivenConfig, tau: f64) -> Result<UnresolvedCorrelators> {
    check_time(tau)?;
    let g = Geometry::new(config)?;
    Ok(unresolved_from(&g, &Decay::at(config, tau), tau))
}

/// τ → ∞ values of the unresolved set.
pub fn unresolved_stationary(config: &DrivenConfig) -> Result<UnresolvedCorrelators> {
    let g = Geometry::new(config)?;
    Ok(unresolved_from(&g, &Decay::settled(), f64::INFINITY))
}

pub fn unresolved_initial(config: &DrivenConfig) -> Result<UnresolvedCorrelators> {
    let g = Geometry::new(config)?;
    Ok(UnresolvedCorrelators {
        tau: 0.0,
        a: re(0.75),
        b_cl: C::new(0.0, 0.5 * g.q),
        b_h: C::new(0.0, 0.5 * g.cos),
        c_clh: C::new(0.25 * g.cos, -0.25 * g.k),
        c_hh: re(0.25),
        d: C::new(0.0, -0.25 * g.sin2 / g.l),
    })
}

/// Forcing terms are all multiplied by Γ, so an undamped config simply
/// drops them.
fn forcing_geometry(config: &DrivenConfig) -> Geometry {
    Geometry::from_parts(config.lambda().unwrap_or(0.0), config.psi(), config.cos_psi(), config.sin_psi())
}

pub fn unresolved_ode_rhs(config: &DrivenConfig, s: &UnresolvedCorrelators) -> UnresolvedCorrelators {
    let g = forcing_geometry(config);
    let (om, ga, c) = (config.omega(), config.gamma(), g.cos);
    UnresolvedCorrelators {
        tau: s.tau,
        a: om * s.b_h - ga * (s.a - 0.25 * g.q),
        b_cl: om * (s.c_clh - c * s.a) - ga * s.b_cl,
        b_h: om * (s.c_hh - s.a) - ga * (s.b_h - 0.25 * g.k),
        c_clh: om * s.d - ga * (s.c_clh - 0.25 * c),
        c_hh: -ga * (s.c_hh - 0.25 * c * c),
        d: om * (c * s.c_hh - s.c_clh) - ga * s.d,
    }
}

pub fn resolved_closed_form(config: &DrivenConfig, tau: f64) -> Result<ResolvedCorrelators> {
    check_time(tau)?;
    let g = Geometry::new(config)?;
    Ok(resolved_from(&g, &Decay::at(config, tau), tau))
}

pub fn resolved_stationary(config: &DrivenConfig) -> Result<ResolvedCorrelators> {
    let g = Geometry::new(config)?;
    Ok(resolved_from(&g, &Decay::settled(), f64::INFINITY))
}

pub fn resolved_initial(config: &DrivenConfig) -> Result<ResolvedCorrelators> {
    let g = Geometry::new(config)?;
    let e = 0.25 * g.cos * g.lambda * g.lambda * g.sin2 / g.l;
    Ok(ResolvedCorrelators {
        tau: 0.0,
        c_clcl: re(0.25),
        c_hcl: C::new(0.25 * g.cos, 0.25 * g.k),
        e_r: C::new(0.0, -e),
        e_l: C::new(0.0, e),
        f: re(0.25 * g.sin2),
        fbar: C::new(0.0, 0.25 * g.sin2 / g.l),
    })
}

pub fn resolved_ode_rhs(config: &DrivenConfig, s: &ResolvedCorrelators) -> ResolvedCorrelators {
    let g = forcing_geometry(config);
    let (om, ga, c) = (config.omega(), config.gamma(), g.cos);
    ResolvedCorrelators {
        tau: s.tau,
        c_clcl: om * s.e_l - ga * (s.c_clcl - 0.25 * g.q),
        c_hcl: -ga * (s.c_hcl - 0.25 * c * g.q),
        e_r: om * s.f - ga * (s.e_r + 0.25 * g.k),
        e_l: om * (c * s.c_hcl - s.c_clcl) - ga * s.e_l,
        f: om * (c * s.fbar - s.e_r) - ga * s.f,
        fbar: -ga * (s.fbar + 0.25 * c * g.k),
    }
}

pub fn abc_coefficients(config: &DrivenConfig, tau: f64) -> Result<AbcCoefficients> {
    check_time(tau)?;
    let g = Geometry::new(config)?;
    Ok(abc_from(&g, &Decay::at(config, tau), tau))
}

pub fn abc_stationary(config: &DrivenConfig) -> Result<AbcCoefficients> {
    let g = Geometry::new(config)?;
    Ok(abc_from(&g, &Decay::settled(), f64::INFINITY))
}
