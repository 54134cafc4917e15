//! Van der Waals forces on one-dimensional chains of point scatterers.
//!
//! The crate is organised bottom-up:
//!
//! * [`profile`]: scatterer chains and susceptibility profiles `chi(x)`.
//! * [`transfer`]: imaginary-frequency transfer matrices and the rescaled
//!   recurrence producing `T22` and its particle derivatives.
//! * [`quadrature`] and [`cache`]: Romberg integration on the mixed-rule axis
//!   with integer node keys and a shared, in-flight aware node cache.
//! * [`force`]: per-particle force integrals, run in parallel over particles.
//! * [`helmholtz`]: macroscopic wave solutions, Green function, force density
//!   and its geometrical-optics asymptotics.
//! * [`stress`]: spectral stresses, local (renormalizing) stresses, the
//!   anomaly term and effective stresses.
//! * [`analytic`]: closed forms for three homogeneous layers and the sech²
//!   profile.
//! * [`specfun`]: Gamma, Gauss hypergeometric and Lerch functions.
//! * [`config`], [`output`] and [`commands`]: run configuration, CSV/JSON
//!   emission and the command implementations of the command-line tool.
//!
//! Units: `hbar = c = 1`; lengths are whatever unit the caller uses.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod force;
pub mod helmholtz;
pub mod output;
pub mod par;
pub mod profile;
pub mod quadrature;
pub mod specfun;
pub mod stress;
pub mod transfer;

pub use error::{Error, Result};
pub use force::{ForceEngine, ForceResult};
pub use helmholtz::WaveSolution;
pub use profile::{ScattererChain, SusceptibilityProfile};
pub use quadrature::{QuadConfig, QuadratureResult};
