//! Effective photonic Kondo model: a Λ emitter driven by coherent light in a
//! chiral waveguide, reduced to a spin-½ exchange-coupled to the photon
//! polarization density.
//!
//! The crate evaluates exact local-spin dynamics, purity, first- and
//! second-order field correlations, power spectra and photon statistics in
//! closed form, and ships an RK4 oracle used to cross-check every closed form.

pub mod bloch;
pub mod cli;
pub mod correlators;
pub mod error;
pub mod model;
pub mod oracle;
pub mod sampling;
pub mod spectra;
pub mod statistics;
pub mod validate;

pub use error::{KondoError, Result};
pub use model::Vec3;
