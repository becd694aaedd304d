//! Exact linear optics on a truncated multimode Fock space.
//!
//! A [`StateVector`] holds complex amplitudes for every photon-number tuple
//! `(n_1, ..., n_m)` with each `n_i <= cutoff`. Unitary elements (creation,
//! displacement, phase shifts, beamsplitters) act on state vectors; photon
//! loss turns a pure state into a classical mixture, which is carried as an
//! [`Ensemble`] of normalized branches. Detection is modelled by
//! [`ThresholdDetector`]s that click on any photon and fire spuriously with a
//! fixed dark probability.
//!
//! Detector efficiency has no field of its own. A threshold detector with
//! efficiency `eta` behaves exactly like a unit-efficiency detector behind a
//! loss channel of transmittance `eta`, so all photonic losses are folded
//! into a single [`Ensemble::apply_loss`] per mode.

mod detector;
mod ensemble;
mod state;

pub use detector::{coincidence_click_probability, ThresholdDetector};
pub use ensemble::{Branch, Ensemble};
pub use state::StateVector;

/// Default photons-per-mode truncation.
pub const DEFAULT_CUTOFF: usize = 16;

/// Largest tolerated weight pushed above the cutoff by a displacement.
pub const DISPLACEMENT_DEFECT_TOLERANCE: f64 = 1e-10;

/// Largest tolerated weight in two-mode sectors that a beamsplitter cannot
/// represent (combined photon number above the cutoff).
pub const BEAMSPLITTER_OVERFLOW_TOLERANCE: f64 = 1e-9;

/// Largest tolerated norm of the top Fock level before a creation operator.
pub const CREATION_TOP_LEVEL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FockError {
    #[error("number of modes must be at least 1")]
    NoModes,
    #[error("photon-number cutoff must be at least 1")]
    ZeroCutoff,
    #[error("mode {mode} out of range for a {num_modes}-mode state")]
    ModeOutOfRange { mode: usize, num_modes: usize },
    #[error("beamsplitter needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("state dimensions differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} amplitudes, got {actual}")]
    AmplitudeCount { expected: usize, actual: usize },
    #[error("state has squared norm {0}, outside (0, 1 + 1e-12]")]
    BadNorm(f64),
    #[error("truncation overflow in mode(s) {modes:?}: weight {weight:e} would leave the cutoff-{cutoff} space")]
    TruncationOverflow {
        modes: Vec<usize>,
        weight: f64,
        cutoff: usize,
    },
    #[error(
        "cutoff {cutoff} too small for displacement |alpha|^2 = {mean:.6}: norm defect {defect:e}"
    )]
    CutoffTooSmall {
        cutoff: usize,
        mean: f64,
        defect: f64,
    },
    #[error("{name} = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("ensemble probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("ensemble has no branches")]
    EmptyEnsemble,
    #[error("detector mode groups must be nonempty and disjoint")]
    BadGroups,
    #[error("dense density matrix of dimension {0} is too large")]
    DensityTooLarge(usize),
}
