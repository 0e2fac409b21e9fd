//! Static model parameters: the Λ-emitter to Kondo mapping, Jones calculus
//! for the coherent drive, and the derived precession/decay quantities.
//!
//! Pauli convention used throughout the crate: σ_z is diagonal in the
//! (+, −) basis and σ_y = ((0, −i), (i, 0)). The Jones vector of a pair of
//! amplitudes (α₊, α₋) is the bilinear α†(σ/2L)α, so n_cl = +e_z is right
//! circular, −e_z left circular, and the equator holds linear polarizations.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{KondoError, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance on |n| − 1 for any vector documented as a unit vector.
pub const UNIT_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_unit(v: &Vec3, what: &'static str) -> Result<()> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(KondoError::NonUnitVector { what, norm });
    }
    Ok(())
}

pub(crate) fn check_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(KondoError::InvalidInput(format!("{what} must be finite, got {x}")))
    }
}

/// Three-level Λ emitter in the far-detuned regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterSpec {
    pub g_plus: f64,
    pub g_minus: f64,
    pub omega3: f64,
    pub delta: f64,
}

impl EmitterSpec {
    pub fn new(g_plus: f64, g_minus: f64, omega3: f64, delta: f64) -> Result<Self> {
        for (x, name) in [(g_plus, "g_plus"), (g_minus, "g_minus"), (delta, "delta")] {
            check_finite(x, name)?;
        }
        if !(omega3 > 0.0) || !omega3.is_finite() {
            return Err(KondoError::NonPositiveOmega3(omega3));
        }
        Ok(Self { g_plus, g_minus, omega3, delta })
    }

    /// The effective model assumes |Δ| ≪ ω₃. Violations are allowed but
    /// callers may want to warn.
    pub fn is_far_detuned(&self) -> bool {
        self.delta.abs() < 0.1 * self.omega3
    }
}

/// Exchange couplings obtained from the Schrieffer-Wolff elimination of the
/// excited level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KondoCoupling {
    /// Isotropic coupling 4g₊g₋/ω₃ (equals 4g²/ω₃ when g₊ = g₋).
    pub j: f64,
    pub j_par: f64,
    pub j_perp: f64,
    pub anisotropic: bool,
}

pub fn derive_kondo_coupling(spec: &EmitterSpec) -> Result<KondoCoupling> {
    if !(spec.omega3 > 0.0) {
        return Err(KondoError::NonPositiveOmega3(spec.omega3));
    }
    let j_par = 2.0 * (spec.g_plus * spec.g_plus + spec.g_minus * spec.g_minus) / spec.omega3;
    let j_perp = 4.0 * spec.g_plus * spec.g_minus / spec.omega3;
    let scale = j_par.abs().max(j_perp.abs());
    let anisotropic = (j_par - j_perp).abs() > 1e-12 * scale;
    Ok(KondoCoupling { j: j_perp, j_par, j_perp, anisotropic })
}

/// Parameters of the driven Kondo problem: coupling, photon density,
/// two-photon detuning and carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KondoParams {
    pub j: f64,
    pub f: f64,
    pub delta: f64,
    pub omega0: f64,
}

impl KondoParams {
    pub fn new(j: f64, f: f64, delta: f64, omega0: f64) -> Result<Self> {
        check_finite(j, "J")?;
        check_finite(f, "f")?;
        check_finite(delta, "delta")?;
        check_finite(omega0, "omega0")?;
        if j < 0.0 {
            return Err(KondoError::NegativeCoupling(j));
        }
        if f < 0.0 {
            return Err(KondoError::InvalidInput(format!("photon density must be non-negative, got {f}")));
        }
        if !(omega0 > 0.0) {
            return Err(KondoError::InvalidInput(format!("carrier frequency must be positive, got {omega0}")));
        }
        Ok(Self { j, f, delta, omega0 })
    }

    /// Builds parameters from an emitter; anisotropic emitters are rejected.
    pub fn from_emitter(spec: &EmitterSpec, f: f64, omega0: f64) -> Result<Self> {
        let coupling = derive_kondo_coupling(spec)?;
        if coupling.anisotropic {
            return Err(KondoError::Anisotropic { j_par: coupling.j_par, j_perp: coupling.j_perp });
        }
        Self::new(coupling.j, f, spec.delta, omega0)
    }
}

/// Scattering phase φ = 2 arctan(πJ) ∈ [0, π) separating the singlet and
/// triplet channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPhase {
    phi: f64,
}

impl ScatteringPhase {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn exp_i(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }

    pub fn sin_half(&self) -> f64 {
        (0.5 * self.phi).sin()
    }

    pub fn cos_half(&self) -> f64 {
        (0.5 * self.phi).cos()
    }

    pub fn sin(&self) -> f64 {
        self.phi.sin()
    }
}

pub fn scattering_phase(j: f64) -> Result<ScatteringPhase> {
    check_finite(j, "J")?;
    if j < 0.0 {
        return Err(KondoError::NegativeCoupling(j));
    }
    Ok(ScatteringPhase { phi: 2.0 * (PI * j).atan() })
}

/// Real vector Σ u*_σ σ_{σσ'} v_{σ'} (the real part, which is the whole
/// value when u = v).
pub fn pauli_bilinear(u: [Complex64; 2], v: [Complex64; 2]) -> Vec3 {
    let i = Complex64::i();
    let x = u[0].conj() * v[1] + u[1].conj() * v[0];
    let y = u[0].conj() * (-i) * v[1] + u[1].conj() * i * v[0];
    let z = u[0].conj() * v[0] - u[1].conj() * v[1];
    Vec3::new(x.re, y.re, z.re)
}

/// Coherent drive amplitudes of a rectangular pulse of length L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesPolarization {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub length: f64,
}

impl JonesPolarization {
    pub fn new(alpha_plus: Complex64, alpha_minus: Complex64, length: f64) -> Result<Self> {
        for (x, name) in [
            (alpha_plus.re, "alpha_plus"),
            (alpha_plus.im, "alpha_plus"),
            (alpha_minus.re, "alpha_minus"),
            (alpha_minus.im, "alpha_minus"),
        ] {
            check_finite(x, name)?;
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(KondoError::InvalidInput(format!("pulse length must be positive, got {length}")));
        }
        Ok(Self { alpha_plus, alpha_minus, length })
    }

    /// Amplitudes realising a given Jones direction and photon density:
    /// α = √(fL)·(cos θ/2, e^{iϕ} sin θ/2) for n = (θ, ϕ) in polar angles.
    pub fn from_direction(n_cl: &Vec3, f: f64, length: f64) -> Result<Self> {
        check_unit(n_cl, "n_cl")?;
        let theta = n_cl.z.clamp(-1.0, 1.0).acos();
        let azimuth = n_cl.y.atan2(n_cl.x);
        let amp = (f * length).sqrt();
        Self::new(
            Complex64::new(amp * (0.5 * theta).cos(), 0.0),
            Complex64::from_polar(amp * (0.5 * theta).sin(), azimuth),
            length,
        )
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha_plus, self.alpha_minus]
    }

    pub fn photon_density(&self) -> f64 {
        (self.alpha_plus.norm_sqr() + self.alpha_minus.norm_sqr()) / self.length
    }

    /// Classical Jones vector s_cl = α†(σ/2L)α.
    pub fn jones_vector(&self) -> Vec3 {
        let a = self.amplitudes();
        pauli_bilinear(a, a) / (2.0 * self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesDecomposition {
    pub f: f64,
    pub s_cl: Vec3,
    pub n_cl: Vec3,
}

pub fn jones_from_amplitudes(pol: &JonesPolarization) -> Result<JonesDecomposition> {
    let f = pol.photon_density();
    let s_cl = pol.jones_vector();
    if !(f > 0.0) {
        return Err(KondoError::ZeroField);
    }
    Ok(JonesDecomposition { f, s_cl, n_cl: 2.0 * s_cl / f })
}

/// Full parameter bundle for the driven problem with every derived rate and
/// axis precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenConfig {
    params: KondoParams,
    n_cl: Vec3,
    phase: ScatteringPhase,
    lamb_shift: f64,
    h_eff: Vec3,
    omega: f64,
    gamma: f64,
    n_h: Vec3,
    lambda: Option<f64>,
    psi: f64,
    cos_psi: f64,
    sin_psi: f64,
    degenerate: bool,
}

pub fn build_driven_config(params: KondoParams, n_cl: Vec3) -> Result<DrivenConfig> {
    check_unit(&n_cl, "n_cl")?;
    let phase = scattering_phase(params.j)?;
    let jf = params.j * params.f;
    let lamb_shift = PI * jf * phase.cos_half().powi(2);
    let gamma = 0.5 * PI * jf * phase.sin();
    let h_eff = lamb_shift * n_cl + params.delta * Vec3::z();
    let omega = h_eff.norm();
    let degenerate = omega == 0.0;
    let n_h = if degenerate { Vec3::z() } else { h_eff / omega };
    // atan2 keeps ψ accurate near 0 and π where arccos loses half the digits
    let (across, along) = (n_h.cross(&n_cl).norm(), n_h.dot(&n_cl));
    let psi = across.atan2(along);
    let r = across.hypot(along);
    let lambda = (gamma > 0.0).then(|| omega / gamma);
    Ok(DrivenConfig {
        params,
        n_cl,
        phase,
        lamb_shift,
        h_eff,
        omega,
        gamma,
        n_h,
        lambda,
        psi,
        cos_psi: along / r,
        sin_psi: across / r,
        degenerate,
    })
}

impl DrivenConfig {
    pub fn params(&self) -> &KondoParams {
        &self.params
    }

    pub fn f(&self) -> f64 {
        self.params.f
    }

    pub fn n_cl(&self) -> Vec3 {
        self.n_cl
    }

    pub fn phase(&self) -> ScatteringPhase {
        self.phase
    }

    /// Ω₀ = πJf cos²(φ/2), the Lamb shift of the Zeeman field along n_cl.
    pub fn lamb_shift(&self) -> f64 {
        self.lamb_shift
    }

    pub fn h_eff(&self) -> Vec3 {
        self.h_eff
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_h(&self) -> Vec3 {
        self.n_h
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// Exactly ±1 (and sin ψ exactly 0) when the axes are collinear.
    pub fn cos_psi(&self) -> f64 {
        self.cos_psi
    }

    pub fn sin_psi(&self) -> f64 {
        self.sin_psi
    }

    /// Set when Ω = 0; n_h then defaults to e_z.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// λ, or `NoDissipation` when Γ = 0.
    pub fn require_dissipation(&self) -> Result<f64> {
        self.lambda.ok_or(KondoError::NoDissipation)
    }

    pub fn require_precession(&self) -> Result<()> {
        if self.degenerate {
            Err(KondoError::ZeroEffectiveField)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coupling_isotropic_and_zero() {
        let c = derive_kondo_coupling(&EmitterSpec::new(1.0, 1.0, 4.0, 0.0).unwrap()).unwrap();
        assert_eq!((c.j, c.j_par, c.j_perp, c.anisotropic), (1.0, 1.0, 1.0, false));
        let c = derive_kondo_coupling(&EmitterSpec::new(0.0, 0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(c.j, 0.0);
        assert!(!c.anisotropic);
    }

    #[test]
    fn coupling_anisotropic() {
        let spec = EmitterSpec::new(1.0, 2.0, 10.0, 0.0).unwrap();
        let c = derive_kondo_coupling(&spec).unwrap();
        assert!(close(c.j_par, 1.0, 1e-15));
        assert!(close(c.j_perp, 0.8, 1e-15));
        assert!(c.anisotropic);
        assert!(matches!(
            KondoParams::from_emitter(&spec, 1.0, 1.0),
            Err(KondoError::Anisotropic { .. })
        ));
    }

    #[test]
    fn emitter_rejects_bad_omega3() {
        assert_eq!(EmitterSpec::new(1.0, 1.0, 0.0, 0.0), Err(KondoError::NonPositiveOmega3(0.0)));
        assert!(EmitterSpec::new(1.0, 1.0, -2.0, 0.0).is_err());
        let spec = EmitterSpec { g_plus: 1.0, g_minus: 1.0, omega3: -1.0, delta: 0.0 };
        assert_eq!(derive_kondo_coupling(&spec), Err(KondoError::NonPositiveOmega3(-1.0)));
        assert!(!EmitterSpec::new(1.0, 1.0, 1.0, 0.5).unwrap().is_far_detuned());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(scattering_phase(0.0).unwrap().phi(), 0.0);
        assert!(close(scattering_phase(1.0 / PI).unwrap().phi(), PI / 2.0, 1e-15));
        let p = scattering_phase(0.2).unwrap();
        assert!(close(p.phi(), 2.0 * (0.2 * PI).atan(), 0.0));
        let z = Complex64::new(1.0, 0.2 * PI) / Complex64::new(1.0, -0.2 * PI);
        assert!((p.exp_i() - z).norm() < 1e-15);
        assert_eq!(scattering_phase(-0.1), Err(KondoError::NegativeCoupling(-0.1)));
    }

    #[test]
    fn jones_examples() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let d = jones_from_amplitudes(&JonesPolarization::new(one, zero, 1.0).unwrap()).unwrap();
        assert_eq!(d.f, 1.0);
        assert_eq!(d.n_cl, Vec3::z());
        let d = jones_from_amplitudes(&JonesPolarization::new(one, one, 2.0).unwrap()).unwrap();
        assert_eq!(d.f, 1.0);
        assert_eq!(d.n_cl, Vec3::x());
        // relative phase +i maps to +e_y with σ_y = ((0,-i),(i,0))
        let d = jones_from_amplitudes(&JonesPolarization::new(one, Complex64::i(), 2.0).unwrap()).unwrap();
        assert_eq!(d.f, 1.0);
        assert!((d.n_cl - Vec3::y()).norm() < 1e-15);
        assert_eq!(
            jones_from_amplitudes(&JonesPolarization::new(zero, zero, 1.0).unwrap()),
            Err(KondoError::ZeroField)
        );
        assert!(JonesPolarization::new(one, one, 0.0).is_err());
    }

    #[test]
    fn driven_config_examples() {
        let n = Vec3::new(0.6, 0.0, 0.8);
        let c = build_driven_config(KondoParams::new(0.3, 2.0, 0.0, 1.0).unwrap(), n).unwrap();
        assert!((c.n_h() - n).norm() < 1e-15);
        assert_eq!(c.psi(), 0.0);

        let c = build_driven_config(KondoParams::new(0.2, 0.0, 1.0, 1.0).unwrap(), Vec3::x()).unwrap();
        assert_eq!((c.lamb_shift(), c.gamma(), c.omega()), (0.0, 0.0, 1.0));
        assert_eq!(c.h_eff(), Vec3::z());
        assert_eq!(c.n_h(), Vec3::z());
        assert!(close(c.psi(), PI / 2.0, 1e-15));
        assert_eq!(c.lambda(), None);
        assert_eq!(c.require_dissipation(), Err(KondoError::NoDissipation));
    }

    #[test]
    fn driven_config_numeric() {
        let c = build_driven_config(KondoParams::new(0.1, 1.0, 0.5, 1.0).unwrap(), Vec3::x()).unwrap();
        let phi = 2.0 * (0.1 * PI).atan();
        let om0 = PI * 0.1 * (0.5 * phi).cos().powi(2);
        let gamma = 0.5 * PI * 0.1 * phi.sin();
        assert!(close(c.lamb_shift(), om0, 1e-15));
        assert!(close(c.gamma(), gamma, 1e-15));
        let omega2 = om0 * om0 + 0.25;
        assert!(close(c.omega().powi(2), omega2, 1e-14));
        assert!(close(c.lambda().unwrap(), omega2.sqrt() / gamma, 1e-13));
        assert!(close(c.cos_psi(), om0 / omega2.sqrt(), 1e-15));
        assert_eq!(c.n_h().y, 0.0);
    }

    #[test]
    fn degenerate_axis_is_flagged() {
        let c = build_driven_config(KondoParams::new(0.0, 1.0, 0.0, 1.0).unwrap(), Vec3::x()).unwrap();
        assert!(c.is_degenerate());
        assert_eq!(c.n_h(), Vec3::z());
        assert!(close(c.psi(), PI / 2.0, 1e-15));
        assert_eq!(c.require_precession(), Err(KondoError::ZeroEffectiveField));
    }

    #[test]
    fn non_unit_drive_rejected() {
        let p = KondoParams::new(0.1, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            build_driven_config(p, Vec3::new(1.0, 1e-4, 0.0)),
            Err(KondoError::NonUnitVector { .. })
        ));
    }

    fn unit_from_angles(theta: f64, az: f64) -> Vec3 {
        Vec3::new(theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos())
    }

    proptest! {
        #[test]
        fn phase_identity(j in 0.0f64..1e3) {
            let p = scattering_phase(j).unwrap();
            let z = Complex64::new(1.0, PI * j) / Complex64::new(1.0, -PI * j);
            prop_assert!((p.exp_i() - z).norm() < 1e-14);
            prop_assert!((0.0..PI).contains(&p.phi()));
        }

        #[test]
        fn jones_bilinear_reconstructs(
            ar in -3.0f64..3.0, ai in -3.0f64..3.0, br in -3.0f64..3.0, bi in -3.0f64..3.0,
            len in 0.1f64..10.0,
        ) {
            prop_assume!(ar * ar + ai * ai + br * br + bi * bi > 1e-6);
            let pol = JonesPolarization::new(Complex64::new(ar, ai), Complex64::new(br, bi), len).unwrap();
            let d = jones_from_amplitudes(&pol).unwrap();
            let a = pol.amplitudes();
            prop_assert!((d.f * d.n_cl / 2.0 - pauli_bilinear(a, a) / (2.0 * len)).norm() < 1e-14);
            prop_assert!((d.n_cl.norm() - 1.0).abs() < 1e-12);
            prop_assert!((d.s_cl.norm() - d.f / 2.0).abs() < 1e-12 * d.f.max(1.0));
        }

        #[test]
        fn from_direction_round_trips(theta in 0.0f64..PI, az in -PI..PI, f in 0.01f64..10.0) {
            let n = unit_from_angles(theta, az);
            let pol = JonesPolarization::from_direction(&n, f, 3.0).unwrap();
            let d = jones_from_amplitudes(&pol).unwrap();
            prop_assert!((d.n_cl - n).norm() < 1e-12);
            prop_assert!((d.f - f).abs() < 1e-12 * f);
        }

        #[test]
        fn derived_quantities(
            j in 0.0f64..2.0, f in 0.0f64..5.0, delta in -5.0f64..5.0,
            theta in 0.0f64..PI, az in -PI..PI,
        ) {
            let n = unit_from_angles(theta, az);
            let c = build_driven_config(KondoParams::new(j, f, delta, 1.0).unwrap(), n).unwrap();
            prop_assert!(c.gamma() >= 0.0);
            prop_assert_eq!(c.gamma() == 0.0, j * f == 0.0);
            let om0 = c.lamb_shift();
            let expect = om0 * om0 + delta * delta + 2.0 * om0 * delta * n.z;
            prop_assert!((c.omega().powi(2) - expect).abs() < 1e-12 * (1.0 + expect));
            if c.omega() > 1e-9 {
                let cos_expected = (om0 + delta * n.z) / c.omega();
                prop_assert!((c.cos_psi() - cos_expected).abs() < 1e-12);
                prop_assert!((c.n_h().norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn field_stays_in_drive_plane(j in 0.0f64..2.0, f in 0.0f64..5.0, delta in -5.0f64..5.0, theta in 0.0f64..PI) {
            let n = unit_from_angles(theta, 0.0);
            let c = build_driven_config(KondoParams::new(j, f, delta, 1.0).unwrap(), n).unwrap();
            prop_assert_eq!(c.n_h().y, 0.0);
        }
    }
}
