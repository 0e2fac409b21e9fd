//! Second-order coherence g²_{n,m}(τ) of the scattered light.
//!
//! The auxiliary vectors are carried unscaled: K₀ = f k₀ and
//! K_m = (m·C_s(0)) k_m, so nothing divides by m·C_s(0). Both obey the
//! Bloch equation with the source n_cl/2 multiplied by their norm.
//!
//! Index convention: in g²_{n,m} the second index m is the polarization of
//! the first detected photon and n that of the second, detected τ later.

use rayon::prelude::*;

use crate::bloch::{check_time, relax, stationary_bloch};
use crate::error::{KondoError, Result};
use crate::model::{check_unit, DrivenConfig, Vec3};
use twofloat::TwoFloat;

/// Relative threshold below which a detector counts as dark.
pub const DARK_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KVector {
    pub tau: f64,
    pub value: Vec3,
    /// A_m = m·C_s(0) for the m-channel, f for the scalar channel.
    pub source_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCombinations {
    pub g_nm: f64,
    pub g_n0: f64,
    pub g_0m: f64,
    pub g_00: f64,
}

impl GCombinations {
    /// G_nm + (G_0m + G_n0)/2 + G_00/4
    pub fn coincidence(&self) -> f64 {
        self.g_nm + 0.5 * (self.g_0m + self.g_n0) + 0.25 * self.g_00
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    pub n: Vec3,
    pub m: Vec3,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

/// C_s(0) = (f/2)[cos²(φ/2) n_cl + 2 sin²(φ/2) ⟨S⟩_st − sinφ n_cl×⟨S⟩_st].
pub fn cs_zero(config: &DrivenConfig) -> Result<Vec3> {
    let s = stationary_bloch(config)?.s();
    let n = config.n_cl();
    let ph = config.phase();
    Ok(0.5 * config.f() * (ph.cos_half().powi(2) * n + 2.0 * ph.sin_half().powi(2) * s - ph.sin() * n.cross(&s)))
}

/// K₀(0) when `m` is `None`, otherwise K_m(0).
pub fn k_initial_unscaled(config: &DrivenConfig, m: Option<&Vec3>) -> Result<KVector> {
    let s = stationary_bloch(config)?.s();
    let n = config.n_cl();
    let ph = config.phase();
    let (c2, s2, sn) = (ph.cos_half().powi(2), ph.sin_half().powi(2), ph.sin());
    let f = config.f();
    match m {
        None => Ok(KVector {
            tau: 0.0,
            value: f * (c2 * s + 0.5 * s2 * n + 0.5 * sn * n.cross(&s)),
            source_norm: f,
        }),
        Some(m) => {
            check_unit(m, "m")?;
            let value = 0.5 * f * (n.dot(m) * c2 * s + s.dot(m) * s2 * n - 0.25 * sn * m.cross(&(n - 2.0 * s)));
            Ok(KVector { tau: 0.0, value, source_norm: m.dot(&cs_zero(config)?) })
        }
    }
}

/// Advances K by τ with the Bloch propagator, relaxing to source_norm·⟨S⟩_st.
pub fn k_evolve(config: &DrivenConfig, k0: &KVector, tau: f64) -> Result<KVector> {
    config.require_dissipation()?;
    check_time(tau)?;
    if tau == 0.0 {
        return Ok(KVector { tau: k0.tau, ..*k0 });
    }
    let target = k0.source_norm * stationary_bloch(config)?.s();
    let value = target + relax(config, &(k0.value - target), tau);
    Ok(KVector { tau: k0.tau + tau, value, source_norm: k0.source_norm })
}

fn g_vector(config: &DrivenConfig, n: &Vec3, amplitude: f64, k: &Vec3) -> f64 {
    let ph = config.phase();
    let ncl = config.n_cl();
    0.5 * config.f()
        * n.dot(&(amplitude * ph.cos_half().powi(2) * ncl + 2.0 * ph.sin_half().powi(2) * k - ph.sin() * ncl.cross(k)))
}

/// K_m(τ), K₀(τ) and ⟨S⟩_st. Without coupling (φ = 0) the photons never
/// touch the emitter, so the spin drops out: it is set to zero and the
/// channels reduce to their free-field sources.
fn channels(config: &DrivenConfig, m: &Vec3, tau: f64) -> Result<(KVector, KVector, Vec3)> {
    if config.phase().sin_half() == 0.0 {
        let f = config.f();
        let free = |source_norm| KVector { tau, value: Vec3::zeros(), source_norm };
        return Ok((free(0.5 * f * m.dot(&config.n_cl())), free(f), Vec3::zeros()));
    }
    let km = k_evolve(config, &k_initial_unscaled(config, Some(m))?, tau)?;
    let k0 = k_evolve(config, &k_initial_unscaled(config, None)?, tau)?;
    Ok((km, k0, stationary_bloch(config)?.s()))
}

pub fn g_combinations(config: &DrivenConfig, n: &Vec3, m: &Vec3, tau: f64) -> Result<GCombinations> {
    check_unit(n, "n")?;
    check_unit(m, "m")?;
    check_time(tau)?;
    let f = config.f();
    let (km, k0, _) = channels(config, m, tau)?;
    Ok(GCombinations {
        g_nm: g_vector(config, n, km.source_norm, &km.value),
        g_n0: g_vector(config, n, f, &k0.value),
        g_0m: f * km.source_norm,
        g_00: f * f,
    })
}

// Near a dark detector both g² formulas cancel large terms down to
// f/2 + n·C_s(0). The final combination is therefore done in double-double
// arithmetic on the shared f64 inputs, with the trigonometric factors
// rebuilt from sin(φ/2), cos(φ/2) so every algebraic identity between the
// two paths holds exactly.
type Dd = TwoFloat;
type V3 = [Dd; 3];

fn lift(v: &Vec3) -> V3 {
    [Dd::from(v.x), Dd::from(v.y), Dd::from(v.z)]
}

fn dot(a: &V3, b: &V3) -> Dd {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn comb(terms: &[(Dd, &V3)]) -> V3 {
    let mut out = [Dd::from(0.0); 3];
    for (w, v) in terms {
        for i in 0..3 {
            out[i] += *w * v[i];
        }
    }
    out
}

struct Coincidence {
    f: Dd,
    sh: Dd,
    ch: Dd,
    n: V3,
    ncl: V3,
    s: V3,
    a_m: Dd,
    k_m: V3,
    k_0: V3,
    /// f/2 + m·C_s(0) and f/2 + n·C_s(0)
    dm: Dd,
    dn: Dd,
}

impl Coincidence {
    fn new(config: &DrivenConfig, n: &Vec3, m: &Vec3, tau: f64) -> Result<Self> {
        check_unit(n, "n")?;
        check_unit(m, "m")?;
        check_time(tau)?;
        let (km, k0, spin) = channels(config, m, tau)?;
        let ph = config.phase();
        let f = Dd::from(config.f());
        let (sh, ch) = (Dd::from(ph.sin_half()), Dd::from(ph.cos_half()));
        let ncl = lift(&config.n_cl());
        let s = lift(&spin);
        let nv = lift(n);
        let half = Dd::from(0.5);
        let cs = Self::cs(f, sh, ch, &ncl, &s);
        let a_m = Dd::from(km.source_norm);
        let dm = half * f + a_m;
        let dn = half * f + dot(&nv, &cs);
        let eps = config.f() * DARK_EPSILON;
        for value in [f64::from(dm), f64::from(dn)] {
            if !(value > eps) {
                return Err(KondoError::DetectorDark { value });
            }
        }
        Ok(Self { f, sh, ch, n: nv, ncl, s, a_m, k_m: lift(&km.value), k_0: lift(&k0.value), dm, dn })
    }

    fn cs(f: Dd, sh: Dd, ch: Dd, ncl: &V3, s: &V3) -> V3 {
        let half = Dd::from(0.5);
        let two = Dd::from(2.0);
        let x = cross(ncl, s);
        let v = comb(&[(ch * ch, ncl), (two * sh * sh, s), (-(two * sh * ch), &x)]);
        [half * f * v[0], half * f * v[1], half * f * v[2]]
    }

    fn l(&self, d: &V3) -> V3 {
        let x = cross(&self.ncl, d);
        comb(&[(self.sh, d), (-self.ch, &x)])
    }

    fn l_form(&self) -> f64 {
        let dmv = comb(&[(Dd::from(1.0), &self.k_m), (-self.a_m, &self.s)]);
        let d0v = comb(&[(Dd::from(1.0), &self.k_0), (-self.f, &self.s)]);
        let inner = dot(&self.n, &self.l(&dmv)) + Dd::from(0.5) * dot(&self.n, &self.l(&d0v));
        f64::from(Dd::from(1.0) + self.f * self.sh * inner / (self.dm * self.dn))
    }

    fn g_vector(&self, amplitude: Dd, k: &V3) -> Dd {
        let two = Dd::from(2.0);
        let x = cross(&self.ncl, k);
        let v = comb(&[
            (amplitude * self.ch * self.ch, &self.ncl),
            (two * self.sh * self.sh, k),
            (-(two * self.sh * self.ch), &x),
        ]);
        Dd::from(0.5) * self.f * dot(&self.n, &v)
    }

    fn numerator(&self, k_m: &V3, k_0: &V3) -> Dd {
        let half = Dd::from(0.5);
        let g_nm = self.g_vector(self.a_m, k_m);
        let g_n0 = self.g_vector(self.f, k_0);
        let g_0m = self.f * self.a_m;
        let g_00 = self.f * self.f;
        g_nm + half * (g_0m + g_n0) + Dd::from(0.25) * g_00
    }

    fn ratio_form(&self) -> f64 {
        let scale = |w: Dd| [w * self.s[0], w * self.s[1], w * self.s[2]];
        let at_infinity = self.numerator(&scale(self.a_m), &scale(self.f));
        f64::from(self.numerator(&self.k_m, &self.k_0) / at_infinity)
    }
}

/// g²_{n,m}(τ) = 1 + f sin(φ/2)[n·l(K_m − A_m S) + ½ n·l(K₀ − f S)] / N∞
/// with N∞ = (f/2 + m·C_s(0))(f/2 + n·C_s(0)) and
/// l(d) = sin(φ/2) d − cos(φ/2) n_cl×d.
pub fn g2(config: &DrivenConfig, n: &Vec3, m: &Vec3, tau: f64) -> Result<f64> {
    Ok(Coincidence::new(config, n, m, tau)?.l_form())
}

/// The same g² as the ratio of G_nm + (G_0m + G_n0)/2 + G_00/4 at τ to its
/// analytic limit at τ → ∞.
pub fn g2_via_combinations(config: &DrivenConfig, n: &Vec3, m: &Vec3, tau: f64) -> Result<f64> {
    Ok(Coincidence::new(config, n, m, tau)?.ratio_form())
}

pub fn g2_curve(config: &DrivenConfig, n: &Vec3, m: &Vec3, taus: &[f64]) -> Result<G2Curve> {
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(KondoError::InvalidInput("delay grid must be strictly increasing".into()));
    }
    let values = taus.par_iter().map(|&t| g2(config, n, m, t)).collect::<Result<Vec<_>>>()?;
    Ok(G2Curve { n: *n, m: *m, taus: taus.to_vec(), values })
}
