use thiserror::Error;

/// Everything that can go wrong when building a configuration or evaluating
/// one of the closed forms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KondoError {
    #[error("transition frequency omega3 must be positive, got {0}")]
    NonPositiveOmega3(f64),

    #[error("exchange coupling must be non-negative, got {0}")]
    NegativeCoupling(f64),

    #[error("anisotropic couplings (J_par = {j_par}, J_perp = {j_perp}) are not supported by the dynamics")]
    Anisotropic { j_par: f64, j_perp: f64 },

    #[error("photon density is zero; the drive direction is undefined")]
    ZeroField,

    #[error("effective field vanishes (Omega = 0); the precession axis is undefined")]
    ZeroEffectiveField,

    #[error("decay rate Gamma is zero; no unique stationary state")]
    NoDissipation,

    #[error("{what} must be a unit vector (norm = {norm})")]
    NonUnitVector { what: &'static str, norm: f64 },

    #[error("detector polarization receives no photons (denominator {value:e})")]
    DetectorDark { value: f64 },

    #[error("frequency grid too narrow: tail correction {tail:e} exceeds 1% of inelastic power {inelastic:e}")]
    GridTooNarrow { tail: f64, inelastic: f64 },

    #[error("integration step {step} exceeds stability bound {bound}")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, KondoError>;
