//! Two-photon (Hong-Ou-Mandel) interference between a frequency-converted
//! heralded single photon and a frequency-converted weak coherent pulse.
//!
//! * [`fock`] is an exact linear-optics engine on a truncated multimode Fock
//!   space: creation, displacement, beamsplitters, loss and threshold
//!   detection with dark counts.
//! * [`spectral`] handles Gaussian spectral modes: FWHM conversions, filter
//!   cascades and the delay-dependent mode overlap `V(tau)`.
//! * [`experiment`] assembles the interference experiment, evaluates the
//!   exact and closed-form coincidence models, and derives visibilities,
//!   dip curves and the optimal coherent-pulse brightness.
//! * [`validation`] bundles the model's invariants as runnable checks.
//!
//! ```
//! use hom_core::experiment::{visibility, ExperimentParams, Method};
//!
//! let params = ExperimentParams::measured();
//! let v = visibility(&params, Method::ClosedForm).unwrap();
//! assert!((v - 0.7197).abs() < 1e-4);
//! ```

pub mod experiment;
pub mod fock;
mod quadrature;
pub mod spectral;
pub mod validation;

pub use quadrature::NonConvergence;
